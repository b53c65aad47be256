"""Concrete finite-dimensional normed spaces.

Space descriptors are small frozen dataclasses; norm evaluation is a pure
function of the descriptor and the input array.  Scalars are real everywhere
except for Schatten spaces, which own complex d x d matrices (their ambient
dimension is d*d).  Batched variants operate on stacked inputs and are used
by the sampling-heavy verifiers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

INF = math.inf

__all__ = [
    "INF",
    "Lp",
    "Euclid",
    "Schatten",
    "CustomSpace",
    "TwoSum",
    "norm",
    "norm_batch",
    "singular_values",
    "singular_values_stack",
    "dual_exponent",
    "banach_mazur_lp_vs_hilbert",
    "as_real_vector",
    "as_matrix",
    "space_to_dict",
    "space_from_dict",
]


def _check_exponent(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"norm exponent must lie in [1, inf], got {p!r}")
    return p


def _check_dim(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def as_real_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite real 1-d float array, optionally of fixed length."""
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        raise TypeError("complex entries are only supported in Schatten spaces")
    arr = arr.astype(float, copy=False)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite entries")
    return arr


def as_matrix(x, d: int | None = None) -> np.ndarray:
    """Coerce to a finite complex square matrix.

    Accepts either a (d, d) array or a flat length d*d vector (row-major).
    """
    arr = np.asarray(x)
    if arr.ndim == 1:
        side = math.isqrt(arr.shape[0])
        if side * side != arr.shape[0]:
            raise ValueError(f"flat matrix input of length {arr.shape[0]} is not square")
        arr = arr.reshape(side, side)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if d is not None and arr.shape[0] != d:
        raise ValueError(f"dimension mismatch: expected {d}x{d}, got {arr.shape[0]}x{arr.shape[1]}")
    arr = arr.astype(complex, copy=False)
    if not (np.all(np.isfinite(arr.real)) and np.all(np.isfinite(arr.imag))):
        raise ValueError("matrix has non-finite entries")
    return arr


def _lp_of_abs(a: np.ndarray, p: float) -> float:
    """l_p norm of a nonnegative 1-d array, scaled against overflow."""
    m = float(a.max()) if a.size else 0.0
    if m == 0.0:
        return 0.0
    if p == INF:
        return m
    if p == 1.0:
        return float(a.sum())
    return float(m * np.power(a / m, p).sum() ** (1.0 / p))


def _lp_of_abs_rows(a: np.ndarray, p: float) -> np.ndarray:
    """Row-wise l_p norm of a nonnegative 2-d array."""
    m = a.max(axis=1)
    if p == INF:
        return m
    if p == 1.0:
        return a.sum(axis=1)
    safe = np.where(m > 0.0, m, 1.0)
    out = safe * np.power(a / safe[:, None], p).sum(axis=1) ** (1.0 / p)
    return np.where(m > 0.0, out, 0.0)


def singular_values(m) -> np.ndarray:
    """Singular values of a square matrix, descending.

    Computed through the Hermitian eigendecomposition of m* m; eigenvalues
    pushed slightly negative by round-off are clamped at zero before the
    square root.
    """
    a = as_matrix(m)
    h = a.conj().T @ a
    w = np.linalg.eigvalsh(h)
    return np.sqrt(np.clip(w, 0.0, None))[::-1]


def singular_values_stack(ms: np.ndarray) -> np.ndarray:
    """Batched :func:`singular_values` over a (..., d, d) stack."""
    a = np.asarray(ms, dtype=complex)
    h = np.conj(np.swapaxes(a, -1, -2)) @ a
    w = np.linalg.eigvalsh(h)
    return np.sqrt(np.clip(w, 0.0, None))[..., ::-1]


@dataclass(frozen=True)
class Lp:
    """Real l_p space of dimension d, p in [1, inf]."""

    p: float
    d: int

    def __post_init__(self):
        object.__setattr__(self, "p", _check_exponent(self.p))
        object.__setattr__(self, "d", _check_dim(self.d))

    @property
    def dim(self) -> int:
        return self.d

    def norm(self, x) -> float:
        arr = as_real_vector(x, self.d)
        return _lp_of_abs(np.abs(arr), self.p)

    def norm_batch(self, xs: np.ndarray) -> np.ndarray:
        return _lp_of_abs_rows(np.abs(np.asarray(xs, dtype=float)), self.p)


@dataclass(frozen=True)
class Euclid:
    """Real Euclidean space of dimension d."""

    d: int

    def __post_init__(self):
        object.__setattr__(self, "d", _check_dim(self.d))

    @property
    def dim(self) -> int:
        return self.d

    def norm(self, x) -> float:
        # not np.linalg.norm: that squares without rescaling and drowns
        # at ~1e-154 / overflows at ~1e154
        arr = as_real_vector(x, self.d)
        return _lp_of_abs(np.abs(arr), 2.0)

    def norm_batch(self, xs: np.ndarray) -> np.ndarray:
        return _lp_of_abs_rows(np.abs(np.asarray(xs, dtype=float)), 2.0)


@dataclass(frozen=True)
class Schatten:
    """Schatten p-class over complex d x d matrices.

    The norm is the l_p norm of the singular value vector; p = inf gives the
    operator norm.  Ambient dimension is d*d.
    """

    p: float
    d: int

    def __post_init__(self):
        object.__setattr__(self, "p", _check_exponent(self.p))
        object.__setattr__(self, "d", _check_dim(self.d))

    @property
    def dim(self) -> int:
        return self.d * self.d

    def norm(self, x) -> float:
        s = singular_values(as_matrix(x, self.d))
        return _lp_of_abs(s, self.p)

    def norm_batch(self, xs: np.ndarray) -> np.ndarray:
        a = np.asarray(xs, dtype=complex)
        if a.ndim == 2:
            a = a.reshape(a.shape[0], self.d, self.d)
        s = singular_values_stack(a)
        return _lp_of_abs_rows(s, self.p)


@dataclass(frozen=True)
class CustomSpace:
    """Norm given by a user oracle on real vectors of dimension d."""

    oracle: Callable[[np.ndarray], float]
    d: int

    def __post_init__(self):
        object.__setattr__(self, "d", _check_dim(self.d))

    @property
    def dim(self) -> int:
        return self.d

    def norm(self, x) -> float:
        arr = as_real_vector(x, self.d)
        v = float(self.oracle(arr))
        if not math.isfinite(v) or v < 0.0:
            raise ValueError(f"norm oracle returned an invalid value {v!r}")
        return v

    def norm_batch(self, xs: np.ndarray) -> np.ndarray:
        return np.array([self.norm(row) for row in np.asarray(xs, dtype=float)])


@dataclass(frozen=True)
class TwoSum:
    """Hilbertian direct sum of real-scalar spaces.

    The norm of a concatenated vector is the Euclidean length of the tuple
    of part norms.  Used wherever a split of the coordinates matters, e.g.
    for the two-projection experiments.
    """

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("TwoSum needs at least one part")
        for s in parts:
            if isinstance(s, Schatten):
                raise TypeError("TwoSum parts must use real scalars")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self) -> int:
        return sum(s.dim for s in self.parts)

    def offsets(self) -> list:
        offs = [0]
        for s in self.parts:
            offs.append(offs[-1] + s.dim)
        return offs

    def split(self, x) -> list:
        arr = as_real_vector(x, self.dim)
        offs = self.offsets()
        return [arr[offs[i]:offs[i + 1]] for i in range(len(self.parts))]

    def norm(self, x) -> float:
        pieces = self.split(x)
        return math.hypot(*(s.norm(v) for s, v in zip(self.parts, pieces)))

    def norm_batch(self, xs: np.ndarray) -> np.ndarray:
        arr = np.asarray(xs, dtype=float)
        offs = self.offsets()
        acc = np.zeros(arr.shape[0])
        for i, s in enumerate(self.parts):
            acc += s.norm_batch(arr[:, offs[i]:offs[i + 1]]) ** 2
        return np.sqrt(acc)


def norm(space, x) -> float:
    """Norm of x in the given space (validates shape and scalar type)."""
    return space.norm(x)


def norm_batch(space, xs) -> np.ndarray:
    """Row-wise norms of a stack of vectors (or matrices for Schatten)."""
    return space.norm_batch(xs)


def dual_exponent(p: float) -> float:
    """Conjugate exponent: 1/p + 1/p' = 1, with 1 and inf swapped."""
    p = _check_exponent(p)
    if p == 1.0:
        return INF
    if p == INF:
        return 1.0
    if p == 2.0:
        return 2.0
    return p / (p - 1.0)


def banach_mazur_lp_vs_hilbert(p: float, d: int) -> float:
    """Banach-Mazur distance d(l_p^d, l_2^d) = d ** |1/2 - 1/p|, p finite."""
    p = _check_exponent(p)
    if p == INF:
        raise ValueError("p must be finite")
    d = _check_dim(d)
    return float(d) ** abs(0.5 - 1.0 / p)


def space_to_dict(space) -> dict:
    """JSON-friendly descriptor for the serializable space kinds."""
    if isinstance(space, Lp):
        return {"kind": "lp", "p": space.p, "d": space.d}
    if isinstance(space, Euclid):
        return {"kind": "euclid", "d": space.d}
    if isinstance(space, Schatten):
        return {"kind": "schatten", "p": space.p, "d": space.d}
    if isinstance(space, TwoSum):
        return {"kind": "two_sum", "parts": [space_to_dict(s) for s in space.parts]}
    raise TypeError(f"space {space!r} has no serializable descriptor")


def space_from_dict(desc: dict):
    """Inverse of :func:`space_to_dict`."""
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ValueError(f"invalid space descriptor {desc!r}")
    kind = desc["kind"]
    if kind == "lp":
        return Lp(float(desc["p"]), int(desc["d"]))
    if kind == "euclid":
        return Euclid(int(desc["d"]))
    if kind == "schatten":
        return Schatten(float(desc["p"]), int(desc["d"]))
    if kind == "two_sum":
        return TwoSum(tuple(space_from_dict(s) for s in desc["parts"]))
    raise ValueError(f"unknown space kind {kind!r}")
