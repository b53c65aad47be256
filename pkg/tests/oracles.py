"""Independent reference computations used to freeze expected test values.

Everything here is deliberately written against plain numpy / math only,
avoiding the library's own code paths (no shared norm helpers, no shared
bisection), so that agreement is evidence rather than tautology.
"""
import math

import numpy as np


def lp_norm_direct(x, p):
    """Plain power-sum l_p norm (no overflow guards; fine for test ranges)."""
    x = np.asarray(x, dtype=float)
    if math.isinf(p):
        return float(np.max(np.abs(x)))
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def schatten_norm_svd(m, p):
    """Schatten norm via numpy's SVD (the library route uses eigvalsh)."""
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if math.isinf(p):
        return float(s[0])
    return float(np.sum(s ** p) ** (1.0 / p))


def luxemburg_bisect(theta, x, max_expand=200):
    """Solve theta(x / lam) = 1 by naive bracket-and-bisect on a callable."""
    if theta(x) == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(max_expand):
        if theta(x / hi) <= 1.0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise RuntimeError("bracket expansion failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if theta(x / mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return hi


def jvn_ratio_lp2(p, ax, ay, s):
    """Parallelogram ratio in l_p^2 for unit x at angle ax, y = s * unit at ay."""

    def nrm(u, v):
        return (abs(u) ** p + abs(v) ** p) ** (1.0 / p)

    x = np.array([math.cos(ax), math.sin(ax)]) / nrm(math.cos(ax), math.sin(ax))
    y = s * np.array([math.cos(ay), math.sin(ay)]) / nrm(math.cos(ay), math.sin(ay))
    lhs = nrm(*(x + y)) ** 2 + nrm(*(x - y)) ** 2
    return lhs / (2.0 * (1.0 + s * s))


def jvn_grid_oracle(p, coarse=180, rounds=3):
    """Angle-grid estimate of the Jordan-von Neumann constant of l_p^2.

    Coarse sweep over (angle(x), angle(y), log ||y||), then a few local
    refinement rounds around the incumbent.  Good to ~1e-8 for smooth maxima.
    """

    def sweep(a_grid, b_grid, s_grid):
        best = (-1.0, 0.0, 0.0, 1.0)
        aa = np.asarray(a_grid)
        for s in s_grid:
            for b in b_grid:
                vals = np.array([jvn_ratio_lp2(p, a, b, s) for a in aa])
                k = int(np.argmax(vals))
                if vals[k] > best[0]:
                    best = (float(vals[k]), float(aa[k]), float(b), float(s))
        return best

    a_grid = np.linspace(0.0, math.pi, coarse, endpoint=False)
    b_grid = np.linspace(0.0, math.pi, coarse, endpoint=False)
    s_grid = np.exp(np.linspace(math.log(0.5), math.log(2.0), 15))
    best = sweep(a_grid, b_grid, s_grid)
    da, ds = math.pi / coarse, math.log(2.0) / 7.0
    for _ in range(rounds):
        _, a0, b0, s0 = best
        a_grid = np.linspace(a0 - da, a0 + da, 21)
        b_grid = np.linspace(b0 - da, b0 + da, 21)
        s_grid = s0 * np.exp(np.linspace(-ds, ds, 11))
        cand = sweep(a_grid, b_grid, s_grid)
        if cand[0] > best[0]:
            best = cand
        da, ds = da / 8.0, ds / 4.0
    return best[0]


def alpha_beta_loop(exponents, avalues):
    """Reference alpha/beta recursion as explicit python loops."""
    alphas = []
    for p, a in zip(exponents, avalues):
        alphas.append(max(a, 1.0) ** (p / 2.0) * max(1.0, 2.0 ** (p - 2.0)))
    betas = []
    for i in range(len(alphas)):
        betas.append(max(alphas[i:]))
    return alphas, betas


def log_family_slope(c, a=1.0):
    """Exact log-log slope limit for exponents 2 + a/log(n+b)."""
    return 4.0 * math.log(c) / a
