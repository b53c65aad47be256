"""Isometric embeddings into hilbertian extensions, and what they preserve.

The central construction embeds a space E0 isometrically into E0 + H (a
hilbertian direct sum with H Euclidean) and iterates the compression P T,
where P is the split projection onto E0.  For honest inclusions the iteration
is stationary; the counterexample embedding built here instead rotates a
one-dimensional hilbertian summand of E0 into H, so the iteration loses that
coordinate in one step while the telescoping identity

    ||x||^2 = ||(PT)^n x||^2 + sum_{k<n} ||Q T (PT)^k x||^2

keeps exact books on where the mass went.  A two-projection search decides
whether a space has any one-dimensional hilbertian summand at all.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import gaussian_batch, rng_stream, structured_vectors
from .spaces import Euclid, TwoSum, as_real_vector, norm_batch

__all__ = [
    "LinearMap",
    "SplitSpace",
    "IsometryCheck",
    "is_isometric_embedding",
    "TwoProjectionCandidate",
    "two_projection_violation",
    "SummandSearchResult",
    "find_one_dim_two_summand",
    "two_summand_grid_floor",
    "build_counterexample_embedding",
    "build_inclusion_embedding",
    "IterationTrace",
    "pt_iterate",
    "LimitIsometryReport",
    "limit_isometry_check",
    "AmbiguousRankError",
    "range_intersection_dim",
    "block_diag_map",
    "block_sum_complement_check",
]


@dataclass(frozen=True)
class SplitSpace:
    """Hilbertian sum E0 + H with the split remembered; H is Euclidean."""

    e0: object
    h: Euclid

    @property
    def dim(self) -> int:
        return self.e0.dim + self.h.dim

    def split(self, x) -> tuple:
        arr = as_real_vector(x, self.dim)
        k = self.e0.dim
        return arr[:k], arr[k:]

    def norm(self, x) -> float:
        xe, xh = self.split(x)
        return math.hypot(self.e0.norm(xe), float(np.linalg.norm(xh)))

    def norm_batch(self, xs) -> np.ndarray:
        arr = np.asarray(xs, dtype=float)
        k = self.e0.dim
        ne = norm_batch(self.e0, arr[:, :k])
        nh = np.linalg.norm(arr[:, k:], axis=1)
        return np.sqrt(ne ** 2 + nh ** 2)


@dataclass(frozen=True)
class LinearMap:
    """A real matrix together with its domain and codomain descriptors."""

    matrix: np.ndarray
    domain: object
    codomain: object

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError(f"matrix must be 2-d, got shape {m.shape}")
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match codomain x domain "
                f"({self.codomain.dim}, {self.domain.dim})"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def apply(self, x) -> np.ndarray:
        return self.matrix @ as_real_vector(x, self.domain.dim)


def _domain_suite(space, samples: int, seed: int, stream: int = 999983) -> np.ndarray:
    struct = [v for v in structured_vectors(space)]
    rand = gaussian_batch(space, samples, rng_stream(seed, stream))
    return np.vstack([np.stack(struct), rand])


@dataclass(frozen=True)
class IsometryCheck:
    isometric: bool
    max_deviation: float
    tolerance: float


def is_isometric_embedding(t: LinearMap, samples: int = 512, seed: int = 0,
                           tol: float = 1e-10) -> IsometryCheck:
    """Max relative deviation | ||Tx|| - ||x|| | / ||x|| over a sample suite."""
    suite = _domain_suite(t.domain, samples, seed)
    nx = norm_batch(t.domain, suite)
    keep = nx > 0.0
    images = suite[keep] @ t.matrix.T
    dev = np.abs(norm_batch(t.codomain, images) - nx[keep]) / nx[keep]
    worst = float(dev.max()) if dev.size else 0.0
    return IsometryCheck(worst <= tol, worst, tol)


# ---------------------------------------------------------------------------
# one-dimensional hilbertian summands via two-projection candidates


@dataclass(frozen=True)
class TwoProjectionCandidate:
    """Direction xi with a functional phi, phi(xi) = 1; P x = phi(x) xi."""

    xi: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", as_real_vector(self.xi))
        object.__setattr__(self, "phi", as_real_vector(self.phi))

    def validate(self, space, tol: float = 1e-10) -> None:
        nxi = space.norm(self.xi)
        if abs(nxi - 1.0) > tol:
            raise ValueError(f"xi must be normalized, got ||xi|| = {nxi}")
        pv = float(self.phi @ self.xi)
        if abs(pv - 1.0) > tol:
            raise ValueError(f"phi(xi) must equal 1, got {pv}")


def _candidate_violations(space, xi_raw: np.ndarray, phi_raw: np.ndarray,
                          suite: np.ndarray, suite_norm2: np.ndarray) -> np.ndarray:
    """Batched objective over rows of (xi_raw, phi_raw) parameter stacks.

    Invalid rows (vanishing xi norm or phi(xi) too close to 0) score 1e6.
    """
    k = xi_raw.shape[0]
    out = np.full(k, 1e6)
    nxi = norm_batch(space, xi_raw)
    ok = nxi > 1e-12
    if not np.any(ok):
        return out
    xi = xi_raw[ok] / nxi[ok, None]
    pv = np.einsum("kd,kd->k", phi_raw[ok], xi)
    ok2 = np.abs(pv) > 1e-9
    if not np.any(ok2):
        return out
    xi = xi[ok2]
    phi = phi_raw[ok][ok2] / pv[ok2, None]
    f = suite @ phi.T                                   # (n_s, k')
    r = suite[:, None, :] - f[:, :, None] * xi[None, :, :]
    rn = norm_batch(space, r.reshape(-1, suite.shape[1])).reshape(f.shape)
    viol = np.abs(suite_norm2[:, None] - (f ** 2 + rn ** 2)) / suite_norm2[:, None]
    vals = viol.max(axis=0)
    idx = np.nonzero(ok)[0][ok2]
    out[idx] = vals
    return out


def two_projection_violation(space, cand: TwoProjectionCandidate,
                             samples: int = 256, seed: int = 0) -> float:
    """Worst relative defect of ||x||^2 = |phi(x)|^2 ||xi||^2 + ||x - phi(x) xi||^2.

    Zero (to round-off) exactly when x -> phi(x) xi is a norm-one projection
    onto a hilbertian summand.
    """
    cand.validate(space)
    suite = _domain_suite(space, samples, seed)
    n2 = norm_batch(space, suite) ** 2
    keep = n2 > 0.0
    v = _candidate_violations(
        space, cand.xi[None, :], cand.phi[None, :], suite[keep], n2[keep]
    )
    return float(v[0])


@dataclass(frozen=True)
class SummandSearchResult:
    found: bool
    candidate: TwoProjectionCandidate | None
    residual: float
    starts: int


_LINE_STEPS = 0.5 * 0.5 ** np.arange(24)


def find_one_dim_two_summand(space, budget: int = 16, seed: int = 0,
                             suite_samples: int = 64, max_steps: int = 150,
                             residual_tol: float = 1e-8) -> SummandSearchResult:
    """Search for a one-dimensional hilbertian summand by descent on (xi, phi).

    Multi-start finite-difference minimization of the two-projection defect
    over a fixed sample suite; success means the residual drops to 1e-8.
    Structured starts pair each basis direction with its own coordinate
    functional, the remaining starts are Gaussian with per-start streams.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    d = space.dim
    suite = _domain_suite(space, suite_samples, seed)
    n2 = norm_batch(space, suite) ** 2
    keep = n2 > 0.0
    suite, n2 = suite[keep], n2[keep]

    def objective(stack: np.ndarray) -> np.ndarray:
        return _candidate_violations(space, stack[:, :d], stack[:, d:], suite, n2)

    starts = []
    for i in range(min(d, 8)):
        e = np.zeros(d)
        e[i] = 1.0
        starts.append(np.concatenate([e, e]))
    k = 0
    while len(starts) < budget:
        rng = rng_stream(seed, k)
        starts.append(rng.standard_normal(2 * d))
        k += 1
    starts = starts[:budget]

    best_val = math.inf
    best_theta = None
    eye = np.eye(2 * d)
    fd = 1e-6
    for theta in starts:
        theta = np.asarray(theta, dtype=float)
        val = float(objective(theta[None, :])[0])
        for _ in range(max_steps):
            probe = np.vstack([theta + fd * eye, theta - fd * eye])
            vals = objective(probe)
            grad = (vals[:2 * d] - vals[2 * d:]) / (2.0 * fd)
            gn = float(np.linalg.norm(grad))
            if gn == 0.0 or not math.isfinite(gn):
                break
            direction = grad / gn
            cands = theta[None, :] - _LINE_STEPS[:, None] * direction[None, :]
            cvals = objective(cands)
            j = int(np.argmin(cvals))
            if cvals[j] >= val - 1e-15:
                break
            val = float(cvals[j])
            theta = cands[j]
        if val < best_val:
            best_val, best_theta = val, theta
        if best_val <= residual_tol * 1e-2:
            break

    found = best_val <= residual_tol
    candidate = None
    if found:
        xi_raw, phi_raw = best_theta[:d], best_theta[d:]
        xi = xi_raw / space.norm(xi_raw)
        phi = phi_raw / float(phi_raw @ xi)
        candidate = TwoProjectionCandidate(xi, phi)
    return SummandSearchResult(found, candidate, float(best_val), len(starts))


def two_summand_grid_floor(space, n_xi: int = 720, n_phi: int = 720,
                           samples: int = 128, seed: int = 0) -> float:
    """Exhaustive angle-grid floor of the two-projection defect, d = 2 only.

    Scans xi and phi directions over half-turns (signs cancel after the
    phi(xi) = 1 rescaling) and returns the smallest worst-case defect.  A
    floor bounded away from zero certifies that no one-dimensional
    hilbertian summand exists anywhere near the grid.
    """
    if space.dim != 2:
        raise ValueError("the angle grid applies to two-dimensional spaces only")
    suite = _domain_suite(space, samples, seed)
    n2 = norm_batch(space, suite) ** 2
    keep = n2 > 0.0
    suite, n2 = suite[keep], n2[keep]

    b = np.arange(n_phi) * math.pi / n_phi
    dirs_b = np.stack([np.cos(b), np.sin(b)], axis=1)
    xb = suite @ dirs_b.T                                # (n_s, n_phi)
    floor = math.inf
    for ang in np.arange(n_xi) * math.pi / n_xi:
        xi_dir = np.array([math.cos(ang), math.sin(ang)])
        xi = xi_dir / space.norm(xi_dir)
        pv = dirs_b @ xi
        valid = np.abs(pv) > 1e-9
        if not np.any(valid):
            continue
        f = xb[:, valid] / pv[valid][None, :]
        r = suite[:, None, :] - f[:, :, None] * xi[None, None, :]
        rn = norm_batch(space, r.reshape(-1, 2)).reshape(f.shape)
        viol = np.abs(n2[:, None] - (f ** 2 + rn ** 2)) / n2[:, None]
        floor = min(floor, float(viol.max(axis=0).min()))
    return floor


# ---------------------------------------------------------------------------
# embeddings and the compression iteration


def build_inclusion_embedding(e0, h_dim: int = 4) -> LinearMap:
    """The honest inclusion of E0 into E0 + H (zero H-component)."""
    codomain = SplitSpace(e0, Euclid(h_dim))
    m = np.zeros((codomain.dim, e0.dim))
    m[:e0.dim, :e0.dim] = np.eye(e0.dim)
    return LinearMap(m, e0, codomain)


def build_counterexample_embedding(e1, h_dim: int = 4) -> LinearMap:
    """Isometry of E0 = E1 + R into E0 + H that moves the line into H.

    Acts as the identity on E1 and sends the distinguished unit vector of
    the scalar summand to the first basis vector of H.  Both coordinates are
    hilbertian, so norms are preserved exactly, yet the range meets H in a
    one-dimensional subspace and the compression P T kills the line.
    """
    e0 = TwoSum((e1, Euclid(1)))
    codomain = SplitSpace(e0, Euclid(h_dim))
    d0 = e0.dim
    m = np.zeros((codomain.dim, d0))
    m[:e1.dim, :e1.dim] = np.eye(e1.dim)
    m[d0, d0 - 1] = 1.0
    return LinearMap(m, e0, codomain)


@dataclass(frozen=True)
class IterationTrace:
    """Norms ||(PT)^n x||, residuals ||QT(PT)^n x||^2 and telescoping defects.

    defects[n-1] is the relative error of the telescoping identity after n
    steps (relative to ||x||^2).
    """

    norms: np.ndarray
    residuals: np.ndarray
    defects: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.residuals)

    def csv_rows(self):
        for n in range(1, self.steps + 1):
            yield (n, self.norms[n], self.residuals[n - 1], self.defects[n - 1])


def pt_iterate(t: LinearMap, x, n_max: int = 50) -> IterationTrace:
    """Iterate the compression P T from x, with exact mass bookkeeping."""
    if not isinstance(t.codomain, SplitSpace):
        raise ValueError("iteration needs a codomain with a distinguished split")
    if t.codomain.e0.dim != t.domain.dim:
        raise ValueError("the split E0-part must match the domain")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    y = as_real_vector(x, t.domain.dim)
    k0 = t.domain.dim
    nx = t.domain.norm(y)
    base = nx * nx
    denom = base if base > 0.0 else 1.0
    norms = [nx]
    residuals: list = []
    defects: list = []
    for _ in range(n_max):
        z = t.matrix @ y
        zh = z[k0:]
        residuals.append(float(zh @ zh))
        y = z[:k0]
        norms.append(t.domain.norm(y))
        defects.append(abs(base - (norms[-1] ** 2 + math.fsum(residuals))) / denom)
    return IterationTrace(np.array(norms), np.array(residuals), np.array(defects))


@dataclass(frozen=True)
class LimitSample:
    norm_x: float
    limit: float
    cauchy_ok: bool
    passed: bool


@dataclass(frozen=True)
class LimitIsometryReport:
    entries: tuple
    all_passed: bool
    non_cauchy: tuple
    summand_found: bool | None
    projection_isometric: bool | None


def limit_isometry_check(t: LinearMap, xs, n_max: int = 60, tol: float = 1e-8,
                         cauchy_tol: float = 1e-9, summand_budget: int = 8,
                         seed: int = 0) -> LimitIsometryReport:
    """Does lim ||(PT)^n x|| recover ||x|| on the given samples?

    Each trace must be Cauchy at n_max (the last two recorded norms five
    steps apart within cauchy_tol); traces that are not are reported, never
    silently truncated.  When every sample passes and the domain has no
    one-dimensional hilbertian summand, the projected map must already be
    isometric, which is then verified directly.
    """
    if n_max < 6:
        raise ValueError("n_max must be at least 6 for the Cauchy check")
    entries = []
    non_cauchy = []
    for i, x in enumerate(xs):
        trace = pt_iterate(t, x, n_max)
        limit = float(trace.norms[-1])
        cauchy = abs(trace.norms[-1] - trace.norms[-6]) <= cauchy_tol
        if not cauchy:
            non_cauchy.append(i)
        nx = float(trace.norms[0])
        passed = cauchy and abs(limit - nx) <= tol
        entries.append(LimitSample(nx, limit, cauchy, passed))
    all_passed = all(e.passed for e in entries)
    summand_found = None
    projection_isometric = None
    if all_passed and entries:
        search = find_one_dim_two_summand(t.domain, budget=summand_budget, seed=seed)
        summand_found = search.found
        if not search.found:
            k0 = t.domain.dim
            worst = 0.0
            for x in xs:
                z = t.apply(x)
                worst = max(worst, abs(t.domain.norm(z[:k0]) - t.codomain.norm(z)))
            projection_isometric = worst <= tol
    return LimitIsometryReport(
        tuple(entries), all_passed, tuple(non_cauchy), summand_found,
        projection_isometric,
    )


class AmbiguousRankError(ValueError):
    """Raised when singular values sit too close to the rank threshold."""

    def __init__(self, sigmas):
        super().__init__(f"rank decision ambiguous near the tolerance: sigmas = {sigmas}")
        self.sigmas = sigmas


def range_intersection_dim(t: LinearMap, tol: float = 1e-8) -> int:
    """Dimension of range(T) meet H by principal angles.

    Orthonormalizes the range, takes singular values of its overlap with the
    H coordinate block, and counts cosines above 1 - tol.  Values crowding
    the threshold from below raise :class:`AmbiguousRankError` instead of
    silently rounding.
    """
    if not isinstance(t.codomain, SplitSpace):
        raise ValueError("intersection with H needs a split codomain")
    u, s, _ = np.linalg.svd(t.matrix, full_matrices=False)
    rank = int(np.sum(s > s[0] * max(t.matrix.shape) * np.finfo(float).eps))
    basis = u[:, :rank]
    overlap = basis[t.codomain.e0.dim:, :].T
    if overlap.size == 0:
        return 0
    sigmas = np.linalg.svd(overlap, compute_uv=False)
    sigmas = np.clip(sigmas, 0.0, 1.0)
    near = (sigmas > 1.0 - 50.0 * tol) & (sigmas <= 1.0 - tol)
    if np.any(near):
        raise AmbiguousRankError(sigmas[near])
    return int(np.sum(sigmas > 1.0 - tol))


# ---------------------------------------------------------------------------
# block maps over two-part sums


def _two_part_space(space):
    parts = getattr(space, "parts", None) or getattr(space, "modulars", None)
    offs = space.offsets()
    if parts is None or len(offs) != 3:
        raise ValueError("expected a two-part direct or modular sum")
    return offs


def block_diag_map(u: np.ndarray, v: np.ndarray, domain, codomain,
                   coupling: np.ndarray | None = None) -> LinearMap:
    """Assemble (x, f) -> (U x + [coupling f], V f) over two-part sums.

    The optional coupling block injects an E-component from the F-part and
    exists to manufacture broken maps in tests.
    """
    doffs = _two_part_space(domain)
    coffs = _two_part_space(codomain)
    m = np.zeros((codomain.dim, domain.dim))
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    m[:coffs[1], :doffs[1]] = u
    m[coffs[1]:, doffs[1]:] = v
    if coupling is not None:
        m[:coffs[1], doffs[1]:] = np.asarray(coupling, dtype=float)
    return LinearMap(m, domain, codomain)


def block_sum_complement_check(u: np.ndarray, v: np.ndarray, domain, codomain,
                               samples: int = 128, seed: int = 0,
                               tol: float = 1e-12,
                               coupling: np.ndarray | None = None) -> bool:
    """Does the assembled block map carry the F-part into the F-part?

    The map must be an isometric embedding first; that failing is an error,
    not a negative answer.  Then the E2-component of the image of sampled
    F1-vectors must vanish within tol.
    """
    t = block_diag_map(u, v, domain, codomain, coupling=coupling)
    iso = is_isometric_embedding(t, samples=samples, seed=seed)
    if not iso.isometric:
        raise ValueError(
            f"map is not an isometric embedding (deviation {iso.max_deviation:.3e})"
        )
    doffs = _two_part_space(domain)
    coffs = _two_part_space(codomain)
    f_dim = domain.dim - doffs[1]
    suite = _domain_suite(Euclid(f_dim), samples, seed)
    worst = 0.0
    for f in suite:
        x = np.zeros(domain.dim)
        x[doffs[1]:] = f
        z = t.apply(x)
        e2 = z[:coffs[1]]
        worst = max(worst, float(np.linalg.norm(e2)))
    return worst <= tol
