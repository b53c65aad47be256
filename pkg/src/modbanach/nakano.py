"""Nakano-type modular sequence spaces with variable exponents.

A space is described by an exponent sequence (p_n) and a block family (E_n);
the modular of a finitely supported block vector is

    Theta(x) = sum_n ||x(n)||_{E_n} ** p_n

and the norm is the Luxemburg norm of that modular.  The module also carries
the summability test deciding whether sum_n c ** (2 p_n / |p_n - 2|) is
finite, which governs the existence of an equivalent hilbertian norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spaces
from .modular import ConvexModular, luxemburg_norm
from .spaces import Euclid, Lp, space_from_dict, space_to_dict

__all__ = [
    "P_MAX",
    "ConstantExponents",
    "ExplicitExponents",
    "FormulaExponents",
    "ScalarBlocks",
    "UniformBlocks",
    "CycledBlocks",
    "ExplicitBlocks",
    "MatchedLpBlocks",
    "NakanoSpec",
    "BlockVector",
    "NakanoModular",
    "nakano_modular",
    "nakano_norm",
    "disjoint_additivity_check",
    "weakly_null_surrogate",
    "homogeneity_defect",
    "ConditionTermSeries",
    "ConditionVerdict",
    "ConditionReport",
    "nakano_condition_terms",
    "nakano_condition_verdict",
    "SOME_CONVERGES",
    "NONE_IN_GRID",
    "spec_to_dict",
    "spec_from_dict",
]

#: hard ceiling for exponents; keeps powers well inside double range
P_MAX = 64.0

SOME_CONVERGES = "some-c-converges"
NONE_IN_GRID = "none-in-grid"


def _check_index(n) -> int:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"block index must be a positive integer, got {n!r}")
    return int(n)


def _check_p(p: float, n: int) -> float:
    if not (1.0 <= p <= P_MAX):
        raise ValueError(f"exponent p_{n} = {p!r} outside [1, {P_MAX}]")
    return float(p)


@dataclass(frozen=True)
class ConstantExponents:
    """p_n = p for every n."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(float(self.p), 1))

    def value(self, n: int) -> float:
        _check_index(n)
        return self.p

    def values(self, ns) -> np.ndarray:
        ns = np.asarray(ns)
        return np.full(ns.shape, self.p)

    def bounds(self, window: int = 4096) -> tuple:
        return (self.p, self.p)

    def describe(self) -> dict:
        return {"kind": "constant", "p": self.p}


@dataclass(frozen=True)
class ExplicitExponents:
    """A finite list of exponents; indices beyond the list are an error."""

    exponents: tuple

    def __post_init__(self):
        vals = tuple(_check_p(float(p), i + 1) for i, p in enumerate(self.exponents))
        if not vals:
            raise ValueError("explicit exponent list must be nonempty")
        object.__setattr__(self, "exponents", vals)

    def value(self, n: int) -> float:
        n = _check_index(n)
        if n > len(self.exponents):
            raise ValueError(
                f"index {n} beyond the {len(self.exponents)} explicit exponents"
            )
        return self.exponents[n - 1]

    def values(self, ns) -> np.ndarray:
        return np.array([self.value(int(n)) for n in np.asarray(ns).ravel()])

    def bounds(self, window: int = 4096) -> tuple:
        return (min(self.exponents), max(self.exponents))

    def describe(self) -> dict:
        return {"kind": "explicit", "values": list(self.exponents)}


@dataclass(frozen=True)
class FormulaExponents:
    """One of the closed-form families converging to 2.

    form "power":  p_n = 2 + a / n**s
    form "log":    p_n = 2 + a / log(n + b)
    form "loglog": p_n = 2 + a / log(log(n + b))

    Each family tends to 2 monotonically beyond a small initial index, which
    is checked numerically on a window.  Values are validated lazily to lie
    in [1, P_MAX].
    """

    form: str
    a: float
    b: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        if self.form not in ("power", "log", "loglog"):
            raise ValueError(f"unknown exponent formula {self.form!r}")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "s", float(self.s))
        if self.a == 0.0:
            raise ValueError("formula family needs a != 0 (otherwise use a constant)")
        if self.form == "power" and self.s <= 0.0:
            raise ValueError("power family needs s > 0")
        # denominators must stay positive from n = 1 on
        self.value(1)

    def _raw(self, ns: np.ndarray) -> np.ndarray:
        ns = ns.astype(float)
        if self.form == "power":
            return 2.0 + self.a / ns ** self.s
        if self.form == "log":
            base = np.log(ns + self.b)
            if np.any(base <= 0.0):
                raise ValueError("log family needs log(n + b) > 0 from n = 1 on")
            return 2.0 + self.a / base
        base = np.log(np.log(ns + self.b))
        if np.any(~np.isfinite(base)) or np.any(base <= 0.0):
            raise ValueError("loglog family needs log(log(n + b)) > 0 from n = 1 on")
        return 2.0 + self.a / base

    def value(self, n: int) -> float:
        n = _check_index(n)
        return _check_p(float(self._raw(np.array([n]))[0]), n)

    def values(self, ns) -> np.ndarray:
        ns = np.asarray(ns)
        vals = self._raw(ns)
        bad = (vals < 1.0) | (vals > P_MAX)
        if np.any(bad):
            where = int(np.asarray(ns).ravel()[np.argmax(bad.ravel())])
            raise ValueError(f"exponent at index {where} outside [1, {P_MAX}]")
        return vals

    def bounds(self, window: int = 4096) -> tuple:
        vals = self.values(np.arange(1, window + 1))
        return (min(float(vals.min()), 2.0), max(float(vals.max()), 2.0))

    def monotone_tail_start(self, window: int = 4096) -> int:
        """First index from which |p_n - 2| is nonincreasing on the window."""
        vals = np.abs(self.values(np.arange(1, window + 1)) - 2.0)
        diffs = np.diff(vals)
        rising = np.nonzero(diffs > 0.0)[0]
        if rising.size == 0:
            return 1
        start = int(rising.max()) + 2
        if start >= window:
            raise ValueError("exponent family not monotone toward 2 on the window")
        return start

    def describe(self) -> dict:
        d = {"kind": self.form, "a": self.a}
        if self.form == "power":
            d["s"] = self.s
        else:
            d["b"] = self.b
        return d


# ---------------------------------------------------------------------------
# block families


class ScalarBlocks:
    """Every block is the scalar line."""

    _line = Euclid(1)

    def block(self, n: int, p: float):
        return self._line

    def describe(self) -> dict:
        return {"kind": "scalar"}

    def __eq__(self, other):
        return isinstance(other, ScalarBlocks)

    def __hash__(self):
        return hash("ScalarBlocks")


@dataclass(frozen=True)
class UniformBlocks:
    """The same space at every index."""

    space: object

    def block(self, n: int, p: float):
        return self.space

    def describe(self) -> dict:
        return {"kind": "uniform", "space": space_to_dict(self.space)}


@dataclass(frozen=True)
class CycledBlocks:
    """A finite list of spaces repeated cyclically."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("cycled block list must be nonempty")
        object.__setattr__(self, "blocks", blocks)

    def block(self, n: int, p: float):
        return self.blocks[(n - 1) % len(self.blocks)]

    def describe(self) -> dict:
        return {"kind": "cycle", "spaces": [space_to_dict(s) for s in self.blocks]}


@dataclass(frozen=True)
class ExplicitBlocks:
    """A finite list of spaces; indices beyond the list are an error."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("explicit block list must be nonempty")
        object.__setattr__(self, "blocks", blocks)

    def block(self, n: int, p: float):
        if n > len(self.blocks):
            raise ValueError(f"index {n} beyond the {len(self.blocks)} explicit blocks")
        return self.blocks[n - 1]

    def describe(self) -> dict:
        return {"kind": "list", "spaces": [space_to_dict(s) for s in self.blocks]}


@dataclass(frozen=True)
class MatchedLpBlocks:
    """Block n is l_{p_n}^d, reusing the exponent sequence for the blocks."""

    d: int

    def block(self, n: int, p: float):
        return Lp(p, self.d)

    def describe(self) -> dict:
        return {"kind": "lp_matched", "d": self.d}


@dataclass(frozen=True)
class NakanoSpec:
    """Exponent sequence plus block family."""

    exponents: object
    blocks: object = field(default_factory=ScalarBlocks)

    def exponent(self, n: int) -> float:
        return self.exponents.value(n)

    def block(self, n: int):
        return self.blocks.block(n, self.exponent(n))

    def validate_vector(self, x: "BlockVector") -> None:
        for n, arr in x.items:
            blk = self.block(n)
            if arr.shape[0] != blk.dim:
                raise ValueError(
                    f"block {n} has {arr.shape[0]} coordinates, expected {blk.dim}"
                )


# ---------------------------------------------------------------------------
# block vectors


def _coerce_block(arr) -> np.ndarray:
    a = np.asarray(arr)
    if np.iscomplexobj(a):
        a = a.astype(complex)
        if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
            raise ValueError("block has non-finite entries")
    else:
        a = a.astype(float)
        if not np.all(np.isfinite(a)):
            raise ValueError("block has non-finite entries")
    if a.ndim != 1:
        a = a.ravel()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class BlockVector:
    """Finitely supported vector over the blocks; index -> coordinate array.

    Entries are stored sorted by block index and are immutable.  Arithmetic
    acts blockwise with union support.
    """

    items: tuple

    def __post_init__(self):
        seen = set()
        norm_items = []
        for n, arr in self.items:
            n = _check_index(n)
            if n in seen:
                raise ValueError(f"duplicate block index {n}")
            seen.add(n)
            norm_items.append((n, _coerce_block(arr)))
        norm_items.sort(key=lambda kv: kv[0])
        object.__setattr__(self, "items", tuple(norm_items))

    @classmethod
    def from_dict(cls, d: dict) -> "BlockVector":
        # JSON round trips turn block indices into strings
        return cls(tuple((int(k), v) for k, v in d.items()))

    @property
    def support(self) -> tuple:
        return tuple(n for n, _ in self.items)

    def entry(self, n: int):
        for k, arr in self.items:
            if k == n:
                return arr
        return None

    def _binary(self, other: "BlockVector", sign: float) -> "BlockVector":
        out = {n: arr.copy() for n, arr in self.items}
        for n, arr in other.items:
            if n in out:
                out[n] = out[n] + sign * arr
            else:
                out[n] = sign * arr
        return BlockVector(tuple(out.items()))

    def __add__(self, other):
        return self._binary(other, 1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def scale(self, t: float) -> "BlockVector":
        return BlockVector(tuple((n, t * arr) for n, arr in self.items))

    def restrict_min(self, n0: int) -> "BlockVector":
        """Drop all blocks below index n0 (the tail projection)."""
        return BlockVector(tuple((n, arr) for n, arr in self.items if n >= n0))

    def drop(self, indices) -> "BlockVector":
        dropped = set(indices)
        return BlockVector(tuple((n, arr) for n, arr in self.items if n not in dropped))

    def to_json_obj(self) -> dict:
        return {str(n): np.asarray(arr, dtype=float).tolist() for n, arr in self.items}


def nakano_modular(spec: NakanoSpec, x: BlockVector) -> float:
    """Theta(x) = sum over the support of ||x(n)|| ** p_n."""
    spec.validate_vector(x)
    total = 0.0
    for n, arr in x.items:
        total += spec.block(n).norm(arr) ** spec.exponent(n)
    if not math.isfinite(total):
        raise ValueError("modular value is not finite")
    return total


@dataclass(frozen=True)
class NakanoModular(ConvexModular):
    """ConvexModular wrapper around a NakanoSpec."""

    spec: NakanoSpec

    def scale_terms(self, point: BlockVector):
        self.spec.validate_vector(point)
        norms = []
        exps = []
        for n, arr in point.items:
            norms.append(self.spec.block(n).norm(arr))
            exps.append(self.spec.exponent(n))
        return norms, exps

    def exponent_range(self):
        return self.spec.exponents.bounds()


def nakano_norm(spec: NakanoSpec, x: BlockVector) -> float:
    """Luxemburg norm of a block vector in the Nakano space."""
    return luxemburg_norm(NakanoModular(spec), x)


def disjoint_additivity_check(spec: NakanoSpec, x: BlockVector, y: BlockVector) -> float:
    """|Theta(x + y) - Theta(x) - Theta(y)| for disjointly supported x, y."""
    overlap = set(x.support) & set(y.support)
    if overlap:
        raise ValueError(f"supports overlap at blocks {sorted(overlap)}")
    return abs(nakano_modular(spec, x + y) - nakano_modular(spec, x) - nakano_modular(spec, y))


def _unit_block(spec: NakanoSpec, n: int) -> np.ndarray:
    blk = spec.block(n)
    e = np.zeros(blk.dim)
    e[0] = 1.0
    nrm = blk.norm(e)
    if nrm == 0.0:
        raise ValueError(f"block {n} norm oracle vanishes on a basis vector")
    return e / nrm


def weakly_null_surrogate(spec: NakanoSpec, x: BlockVector, t: float, n: int) -> tuple:
    """Exact modular bookkeeping for a far-out unit block direction.

    Returns (Theta(x + t * u_n), Theta(x) + |t| ** p_n) where u_n is a norm-one
    vector of block n, required to lie outside the support of x.  The two
    numbers agree by disjoint additivity; the second drifts toward
    Theta(x) + t**2 as p_n -> 2.
    """
    n = _check_index(n)
    if n in x.support:
        raise ValueError(f"block {n} lies in the support of x")
    t = float(t)
    u = _unit_block(spec, n)
    shifted = x + BlockVector(((n, t * u),))
    first = nakano_modular(spec, shifted)
    second = nakano_modular(spec, x) + abs(t) ** spec.exponent(n)
    return first, second


def homogeneity_defect(spec: NakanoSpec, x: BlockVector, lam: float, n: int) -> tuple:
    """Defect |Theta(lam x) - lam**2 Theta(x)| with its tail exponent bound.

    Requires the support of x to sit in blocks >= n.  The bound is
    max_{k in supp} | |lam|**p_k - lam**2 | * Theta(x), which collapses as the
    exponents approach 2 along the tail.
    """
    n = _check_index(n)
    if x.support and min(x.support) < n:
        raise ValueError(f"support of x dips below the cutoff {n}")
    lam = float(lam)
    theta_x = nakano_modular(spec, x)
    defect = abs(nakano_modular(spec, x.scale(lam)) - lam ** 2 * theta_x)
    if not x.support:
        return 0.0, 0.0
    factors = [abs(abs(lam) ** spec.exponent(k) - lam ** 2) for k in x.support]
    return defect, max(factors) * theta_x


# ---------------------------------------------------------------------------
# summability test for the equivalent hilbertian norm


def _log_terms(exponents, ns: np.ndarray, c: float) -> np.ndarray:
    if not (0.0 < c < 1.0):
        raise ValueError(f"c must lie in (0, 1), got {c!r}")
    ps = exponents.values(ns)
    gap = np.abs(ps - 2.0)
    if np.any(gap == 0.0):
        where = int(ns[np.argmax(gap == 0.0)])
        raise ValueError(f"exponent equals 2 at index {where}; the series is undefined there")
    return (2.0 * ps / gap) * math.log(c)


@dataclass(frozen=True)
class ConditionTermSeries:
    """First terms of sum c ** (2 p_n / |p_n - 2|) with slope diagnostics."""

    c: float
    indices: np.ndarray
    terms: np.ndarray
    log_terms: np.ndarray
    log_slopes: np.ndarray


def nakano_condition_terms(exponents, c: float, count: int = 64) -> ConditionTermSeries:
    """Terms t_n = c ** (2 p_n / |p_n - 2|) for n = 1..count.

    log t_n is computed directly from the exponent formula (the terms
    themselves may underflow to zero harmlessly).  log_slopes holds the
    discrete d(log t)/d(log n) between consecutive indices.
    """
    if count < 2:
        raise ValueError("need at least two terms")
    ns = np.arange(1, count + 1)
    log_t = _log_terms(exponents, ns, c)
    with np.errstate(under="ignore"):
        terms = np.exp(log_t)
    log_n = np.log(ns)
    slopes = np.diff(log_t) / np.diff(log_n)
    return ConditionTermSeries(float(c), ns, terms, log_t, slopes)


@dataclass(frozen=True)
class ConditionVerdict:
    c: float
    slope: float
    verdict: str


@dataclass(frozen=True)
class ConditionReport:
    verdicts: tuple
    overall: str
    window: tuple
    margin: float

    def verdict_for(self, c: float) -> str:
        for v in self.verdicts:
            if v.c == c:
                return v.verdict
        raise KeyError(c)


def nakano_condition_verdict(
    exponents,
    c_grid,
    count: int = 60,
    window: tuple = (1000, 1000000),
    margin: float = 0.1,
) -> ConditionReport:
    """Classify sum c ** (2 p_n / |p_n - 2|) for each c on the grid.

    The log of the term sequence is fitted against log n over a
    logarithmically sampled window; a fitted slope below -(1 + margin) means
    the series converges, above -(1 - margin) that it diverges, anything
    between is inconclusive.  The overall verdict reports whether any c in
    the grid converges; a finite grid can never certify that no c at all
    works.
    """
    lo, hi = window
    if not (1 <= lo < hi):
        raise ValueError(f"invalid window {window!r}")
    c_grid = [float(c) for c in c_grid]
    if not c_grid:
        raise ValueError("the c grid must not be empty")
    if count < 8:
        raise ValueError("need at least 8 sample points for the slope fit")
    if margin <= 0.0 or margin >= 1.0:
        raise ValueError("margin must lie in (0, 1)")
    ns = np.unique(np.round(np.geomspace(lo, hi, count)).astype(int))
    log_n = np.log(ns)
    verdicts = []
    for c in c_grid:
        log_t = _log_terms(exponents, ns, float(c))
        slope = float(np.polyfit(log_n, log_t, 1)[0])
        if slope < -(1.0 + margin):
            verdict = "converges"
        elif slope > -(1.0 - margin):
            verdict = "diverges"
        else:
            verdict = "inconclusive"
        verdicts.append(ConditionVerdict(float(c), slope, verdict))
    overall = (
        SOME_CONVERGES
        if any(v.verdict == "converges" for v in verdicts)
        else NONE_IN_GRID
    )
    return ConditionReport(tuple(verdicts), overall, (int(lo), int(hi)), float(margin))


# ---------------------------------------------------------------------------
# JSON serialization of space descriptions


def spec_to_dict(spec: NakanoSpec) -> dict:
    return {"exponents": spec.exponents.describe(), "blocks": spec.blocks.describe()}


def _exponents_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "constant":
        return ConstantExponents(float(d["p"]))
    if kind == "explicit":
        return ExplicitExponents(tuple(float(v) for v in d["values"]))
    if kind == "power":
        return FormulaExponents("power", float(d["a"]), s=float(d.get("s", 1.0)))
    if kind in ("log", "loglog"):
        return FormulaExponents(kind, float(d["a"]), b=float(d.get("b", 0.0)))
    raise ValueError(f"unknown exponent kind {kind!r}")


def _blocks_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "scalar":
        return ScalarBlocks()
    if kind == "uniform":
        return UniformBlocks(space_from_dict(d["space"]))
    if kind == "cycle":
        return CycledBlocks(tuple(space_from_dict(s) for s in d["spaces"]))
    if kind == "list":
        return ExplicitBlocks(tuple(space_from_dict(s) for s in d["spaces"]))
    if kind == "lp_matched":
        return MatchedLpBlocks(int(d["d"]))
    raise ValueError(f"unknown block kind {kind!r}")


def spec_from_dict(d: dict) -> NakanoSpec:
    if not isinstance(d, dict) or "exponents" not in d:
        raise ValueError(f"invalid Nakano space description {d!r}")
    exps = _exponents_from_dict(d["exponents"])
    blocks = _blocks_from_dict(d.get("blocks", {"kind": "scalar"}))
    return NakanoSpec(exps, blocks)
