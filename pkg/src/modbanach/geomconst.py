"""Jordan-von Neumann constants and parallelogram asymptotics.

The JvN constant of a space X is

    a(X) = (1/2) sup { ||x+y||^2 + ||x-y||^2 : ||x||^2 + ||y||^2 = 1 },

equivalently 2 sup { ||x||^2 + ||y||^2 : ||x+y||^2 + ||x-y||^2 = 1 }.  It
always lies in [1, 2], equals 1 exactly on inner-product spaces, and is
invariant under duality.  The estimator below produces certified lower
bounds by multi-start projected ascent; Clarkson's inequalities give the
matching upper bound 2 ** (2 |1/2 - 1/p|) for l_p and Schatten-p factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nakano import (
    BlockVector,
    FormulaExponents,
    NakanoSpec,
    P_MAX,
    nakano_modular,
)
from .sampling import gaussian_batch, rng_stream, structured_pairs
from .spaces import Lp, Schatten, dual_exponent, norm_batch

__all__ = [
    "WitnessPair",
    "JvnEstimate",
    "AsymptoticsReport",
    "jvn_ratio",
    "jvn_lower_bound",
    "jvn_upper_bound_clarkson",
    "duality_gap",
    "alpha_beta",
    "clarkson_alpha_upper",
    "clarkson_alpha_tail_bound",
    "tail_parallelogram_defect",
    "clarkson_beta_bound",
]


def jvn_ratio(space, x, y) -> float:
    """(||x+y||^2 + ||x-y||^2) / (2 (||x||^2 + ||y||^2)); needs (x, y) != 0."""
    xa, ya = np.asarray(x), np.asarray(y)
    nx, ny = space.norm(xa), space.norm(ya)
    den = 2.0 * (nx * nx + ny * ny)
    if den == 0.0:
        raise ValueError("x and y must not both vanish")
    ns = space.norm(xa + ya)
    nd = space.norm(xa - ya)
    return (ns * ns + nd * nd) / den


# -- parameter packing: pairs live in a flat real parameter vector ----------


def _is_complex_space(space) -> bool:
    return isinstance(space, Schatten)


def _pack(space, x, y) -> np.ndarray:
    if _is_complex_space(space):
        xa = np.asarray(x, dtype=complex).ravel()
        ya = np.asarray(y, dtype=complex).ravel()
        return np.concatenate([xa.real, xa.imag, ya.real, ya.imag])
    return np.concatenate([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])


def _unpack_stack(space, thetas: np.ndarray) -> tuple:
    k = thetas.shape[0]
    if _is_complex_space(space):
        d2 = space.dim
        xr, xi = thetas[:, :d2], thetas[:, d2:2 * d2]
        yr, yi = thetas[:, 2 * d2:3 * d2], thetas[:, 3 * d2:]
        x = (xr + 1j * xi).reshape(k, space.d, space.d)
        y = (yr + 1j * yi).reshape(k, space.d, space.d)
        return x, y
    half = thetas.shape[1] // 2
    return thetas[:, :half], thetas[:, half:]


def _ratio_stack(space, thetas: np.ndarray) -> np.ndarray:
    x, y = _unpack_stack(space, thetas)
    num = norm_batch(space, x + y) ** 2 + norm_batch(space, x - y) ** 2
    den = 2.0 * (norm_batch(space, x) ** 2 + norm_batch(space, y) ** 2)
    out = np.full(den.shape, -np.inf)
    ok = den > 0.0
    out[ok] = num[ok] / den[ok]
    return out


def _normalize(space, theta: np.ndarray) -> np.ndarray:
    x, y = _unpack_stack(space, theta[None, :])
    s = math.sqrt(float(norm_batch(space, x)[0]) ** 2 + float(norm_batch(space, y)[0]) ** 2)
    return theta / s if s > 0.0 else theta


_LINE_STEPS = 0.25 * 0.5 ** np.arange(24)


def _ascend(space, theta0: np.ndarray, max_steps: int = 200, fd_step: float = 1e-6):
    """Projected ascent of the ratio from one start; returns (value, theta, evals)."""
    theta = _normalize(space, theta0)
    best = float(_ratio_stack(space, theta[None, :])[0])
    evals = 1
    n = theta.shape[0]
    eye = np.eye(n)
    for _ in range(max_steps):
        probe = np.vstack([theta + fd_step * eye, theta - fd_step * eye])
        vals = _ratio_stack(space, probe)
        evals += probe.shape[0]
        grad = (vals[:n] - vals[n:]) / (2.0 * fd_step)
        gn = float(np.linalg.norm(grad))
        if gn == 0.0 or not math.isfinite(gn):
            break
        direction = grad / gn
        cands = theta[None, :] + _LINE_STEPS[:, None] * direction[None, :]
        cvals = _ratio_stack(space, cands)
        evals += cands.shape[0]
        k = int(np.argmax(cvals))
        if cvals[k] <= best + 1e-13:
            break
        best = float(cvals[k])
        theta = _normalize(space, cands[k])
    return best, theta, evals


@dataclass(frozen=True)
class WitnessPair:
    x: np.ndarray
    y: np.ndarray
    value: float


@dataclass(frozen=True)
class JvnEstimate:
    lower_bound: float
    witness: WitnessPair
    starts: int
    evaluations: int
    seed: int


def jvn_lower_bound(space, budget: int = 64, seed: int = 0) -> JvnEstimate:
    """Certified lower bound on a(X) by multi-start finite-difference ascent.

    Starts are the structured seed pairs followed by Gaussian pairs, each
    with its own RNG stream keyed by (seed, start index); the best pair is
    re-ascended after the half-sum/half-difference substitution, which maps
    near-extremal pairs of one formulation onto the other.  Every reported
    value is an actual ratio evaluation, so the bound can exceed a(X) only
    by round-off.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    starts = [_pack(space, x, y) for x, y in structured_pairs(space)]
    starts = starts[:budget]
    i = 0
    while len(starts) < budget:
        rng = rng_stream(seed, i)
        x = gaussian_batch(space, 1, rng)[0]
        y = gaussian_batch(space, 1, rng)[0]
        starts.append(_pack(space, x, y))
        i += 1
    best_val = -np.inf
    best_theta = None
    total_evals = 0
    for theta0 in starts:
        val, theta, ev = _ascend(space, theta0)
        total_evals += ev
        if val > best_val:
            best_val, best_theta = val, theta
    # half-sum / half-difference substitution of the incumbent, then one more ascent
    bx, by = _unpack_stack(space, best_theta[None, :])
    sub = _pack(space, (bx[0] + by[0]) / math.sqrt(2.0), (bx[0] - by[0]) / math.sqrt(2.0))
    val, theta, ev = _ascend(space, sub)
    total_evals += ev
    if val > best_val:
        best_val, best_theta = val, theta
    wx, wy = _unpack_stack(space, best_theta[None, :])
    witness = WitnessPair(wx[0], wy[0], best_val)
    return JvnEstimate(best_val, witness, len(starts) + 1, total_evals, int(seed))


def jvn_upper_bound_clarkson(p: float) -> float:
    """Clarkson bound a(X) <= 2 ** (2 |1/2 - 1/p|) for an l_p or Schatten-p factor."""
    p = float(p)
    if not (1.0 <= p < math.inf):
        raise ValueError(f"p must lie in [1, inf), got {p!r}")
    return 2.0 ** (2.0 * abs(0.5 - 1.0 / p))


def duality_gap(p: float, d: int, budget: int = 64, seed: int = 0) -> float:
    """|a-estimate(l_p^d) - a-estimate(l_p'^d)|; vanishes in exact arithmetic."""
    p = float(p)
    if not (1.0 < p < math.inf):
        raise ValueError(f"duality gap needs p in (1, inf), got {p!r}")
    lb = jvn_lower_bound(Lp(p, d), budget, seed).lower_bound
    lb_dual = jvn_lower_bound(Lp(dual_exponent(p), d), budget, seed).lower_bound
    return abs(lb - lb_dual)


# ---------------------------------------------------------------------------
# parallelogram asymptotics along a block sequence


@dataclass(frozen=True)
class AsymptoticsReport:
    exponents: np.ndarray
    jvn_values: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    tail_bound: float | None


def alpha_beta(exponents, jvn_values, tail_bound: float | None = None) -> AsymptoticsReport:
    """Blockwise parallelogram factors alpha_n and their suffix sups beta_n.

    alpha_n = a(E_n) ** (p_n / 2) * max(1, 2 ** (p_n - 2)) controls the
    two-point modular inequality on block n; beta_n = sup_{k >= n} alpha_k is
    computed over the given finite horizon, optionally floored by an analytic
    bound for the tail beyond it.
    """
    ps = np.asarray(exponents, dtype=float)
    avals = np.asarray(jvn_values, dtype=float)
    if ps.size == 0:
        raise ValueError("empty exponent list")
    if ps.shape != avals.shape:
        raise ValueError("exponents and JvN values must have equal length")
    if np.any((ps < 1.0) | (ps > P_MAX)):
        raise ValueError(f"exponents must lie in [1, {P_MAX}]")
    if np.any(avals < 1.0 - 1e-9):
        raise ValueError("JvN constants below 1 - 1e-9 are invalid")
    alpha = np.maximum(avals, 1.0) ** (ps / 2.0) * np.maximum(1.0, 2.0 ** (ps - 2.0))
    beta = np.maximum.accumulate(alpha[::-1])[::-1]
    if tail_bound is not None:
        beta = np.maximum(beta, float(tail_bound))
    return AsymptoticsReport(ps, avals, alpha, beta, tail_bound)


def clarkson_alpha_upper(p: float) -> float:
    """Upper bound on alpha_n from the Clarkson JvN bound alone."""
    p = float(p)
    if p >= 2.0:
        return 2.0 ** (1.5 * (p - 2.0))
    return 2.0 ** (0.5 * (2.0 - p))


def clarkson_alpha_tail_bound(exponents: FormulaExponents, horizon: int) -> float:
    """sup_{k > horizon} of the Clarkson alpha bound for a formula family.

    Valid because |p_k - 2| decreases toward 0 beyond the family's monotone
    index (checked numerically) and the alpha bound is monotone in |p - 2|.
    """
    if not isinstance(exponents, FormulaExponents):
        raise TypeError("analytic tail bound requires a formula exponent family")
    start = exponents.monotone_tail_start(window=max(4096, horizon + 16))
    if horizon + 1 < start:
        raise ValueError(f"horizon {horizon} precedes the monotone tail (starts at {start})")
    return clarkson_alpha_upper(exponents.value(horizon + 1))


def clarkson_beta_bound(spec: NakanoSpec, cutoff: int, horizon: int = 1000) -> float:
    """beta_cutoff computed from Clarkson bounds over [cutoff, horizon].

    For formula exponent families the analytic tail bound covers everything
    beyond the horizon; otherwise the value is a horizon-window estimate.
    """
    ns = np.arange(cutoff, horizon + 1)
    ps = spec.exponents.values(ns)
    avals = np.array([jvn_upper_bound_clarkson(p) for p in ps])
    rep = alpha_beta(ps, avals)
    beta = float(rep.beta[0])
    if isinstance(spec.exponents, FormulaExponents):
        beta = max(beta, clarkson_alpha_tail_bound(spec.exponents, horizon))
    return beta


def _tail_pairs(spec: NakanoSpec, cutoff: int, samples: int, seed: int, window: int):
    blocks = list(range(cutoff, cutoff + window))
    dims = [spec.block(n).dim for n in blocks]
    out = []
    for i in range(samples):
        rng = rng_stream(seed, i)
        x = BlockVector(tuple((n, rng.standard_normal(d)) for n, d in zip(blocks, dims)))
        y = BlockVector(tuple((n, rng.standard_normal(d)) for n, d in zip(blocks, dims)))
        out.append((x, y))
    return out


def tail_parallelogram_defect(
    spec: NakanoSpec,
    cutoff: int,
    samples: int = 1000,
    seed: int = 0,
    window: int = 8,
    pairs=None,
) -> float:
    """Max of (Theta(x+y) + Theta(x-y)) / (2 (Theta(x) + Theta(y))) on the tail.

    Pairs are supported on blocks >= cutoff (a fixed window right of the
    cutoff when they are sampled here); the max ratio never exceeds the
    suffix bound beta_cutoff.
    """
    if pairs is None:
        pairs = _tail_pairs(spec, cutoff, samples, seed, window)
    worst = 0.0
    for x, y in pairs:
        if x.support and min(x.support) < cutoff:
            raise ValueError(f"pair supported below the cutoff {cutoff}")
        if y.support and min(y.support) < cutoff:
            raise ValueError(f"pair supported below the cutoff {cutoff}")
        num = nakano_modular(spec, x + y) + nakano_modular(spec, x - y)
        den = 2.0 * (nakano_modular(spec, x) + nakano_modular(spec, y))
        if den == 0.0:
            continue
        worst = max(worst, num / den)
    return worst
