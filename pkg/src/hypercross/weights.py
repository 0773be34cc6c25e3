"""Smoothness sequences, cross specifications and the two weight families.

Everything is evaluated in natural-log space.  For a cross specification
with spatial block length ``m`` and ``a = alpha - beta`` the log weight of an
index ``(k, s)`` is

    a * log max_j (1 + k_j) + sum_j g_j(s_j)

where the per-coordinate log factor ``g_j`` is ``r_j * log(1 + s)`` for the
Korobov family and ``r_j * s - q * log(1 + p * s)`` for the analytic family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, NamedTuple

from .errors import (
    BadExponents,
    BadPrefixBlock,
    CountOverflow,
    HypercrossError,
    InfiniteCross,
    NonMonotoneSequence,
    NonPositiveRate,
    PreconditionViolated,
    SpecError,
    UnsupportedZeroM,
)

#: Absolute slack on log-space membership tests.
TOL = 1e-12

#: Hard limit on the active dimension scan.
MAX_ACTIVE_DIM = 10_000_000

KOROBOV = "korobov"
ANALYTIC = "analytic"

_EXP_LIMIT = 700.0

#: Radii and caps beyond this are not resolvable by unit steps in float64.
EXACT_LIMIT = 2**53


@dataclass(frozen=True)
class Tail:
    """Closed-form generator for the rates beyond the explicit prefix."""

    kind: str = "none"
    c0: float = 0.0
    c1: float = 0.0
    omega: float = 0.0
    tau: float = 0.0

    def value(self, j: int) -> float:
        if self.kind == "affine":
            return self.c0 + self.c1 * j
        if self.kind == "power":
            return self.omega * j**self.tau
        raise IndexError(f"tail of kind {self.kind!r} has no rate at j={j}")

    @property
    def unbounded(self) -> bool:
        """True when the generated rates tend to infinity."""
        if self.kind == "affine":
            return self.c1 > 0
        return self.kind == "power"


@dataclass(frozen=True)
class SmoothnessSequence:
    """Positive rates r_1, r_2, ... given as an explicit prefix plus a tail."""

    prefix: tuple[float, ...] = ()
    tail: Tail = field(default_factory=Tail)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(float(r) for r in self.prefix))

    @classmethod
    def finite(cls, rates: Iterable[float]) -> "SmoothnessSequence":
        return cls(tuple(rates), Tail())

    @classmethod
    def affine(cls, c0: float, c1: float, prefix: Iterable[float] = ()) -> "SmoothnessSequence":
        return cls(tuple(prefix), Tail("affine", c0=float(c0), c1=float(c1)))

    @classmethod
    def power(cls, omega: float, tau: float, prefix: Iterable[float] = ()) -> "SmoothnessSequence":
        return cls(tuple(prefix), Tail("power", omega=float(omega), tau=float(tau)))

    @property
    def length(self) -> int | None:
        """Number of coordinates, ``None`` for an infinite sequence."""
        return len(self.prefix) if self.tail.kind == "none" else None

    def has(self, j: int) -> bool:
        return j >= 1 and (self.tail.kind != "none" or j <= len(self.prefix))

    def rate(self, j: int) -> float:
        if j < 1:
            raise IndexError("coordinates are numbered from 1")
        if j <= len(self.prefix):
            return self.prefix[j - 1]
        return self.tail.value(j)

    def rates(self, n: int) -> list[float]:
        """The first ``n`` rates (fewer if the sequence is shorter)."""
        if self.length is not None:
            n = min(n, self.length)
        return [self.rate(j) for j in range(1, n + 1)]

    def is_nondecreasing(self) -> bool:
        rates = list(self.prefix)
        if self.tail.kind != "none":
            rates.append(self.tail.value(len(self.prefix) + 1))
        return all(x <= y for x, y in zip(rates, rates[1:]))

    def check(self, ordered: bool = True) -> None:
        """Raise if a rate is non-positive or the ordering is violated."""
        if any(not (r > 0) or not math.isfinite(r) for r in self.prefix):
            raise NonPositiveRate(f"prefix rates must be positive: {self.prefix}")
        tail = self.tail
        if tail.kind == "affine":
            if tail.c1 < 0:
                raise NonMonotoneSequence("affine tail needs c1 >= 0")
            if not tail.value(len(self.prefix) + 1) > 0:
                raise NonPositiveRate("affine tail produces a non-positive rate")
        elif tail.kind == "power":
            if not (tail.omega > 0 and tail.tau > 0):
                raise NonPositiveRate("power tail needs omega > 0 and tau > 0")
        elif tail.kind != "none":
            raise SpecError(f"unknown tail kind {tail.kind!r}")
        if ordered and not self.is_nondecreasing():
            raise NonMonotoneSequence("smoothness rates must be nondecreasing")

    def to_dict(self) -> dict[str, Any]:
        tail: dict[str, Any] = {"kind": self.tail.kind}
        if self.tail.kind == "affine":
            tail.update(c0=self.tail.c0, c1=self.tail.c1)
        elif self.tail.kind == "power":
            tail.update(omega=self.tail.omega, tau=self.tail.tau)
        return {"prefix": list(self.prefix), "tail": tail}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SmoothnessSequence":
        _reject_unknown(data, {"prefix", "tail"}, "seq")
        tail_data = data.get("tail", {"kind": "none"})
        _reject_unknown(tail_data, {"kind", "c0", "c1", "omega", "tau"}, "seq.tail")
        kind = tail_data.get("kind", "none")
        needed = {"none": (), "affine": ("c0", "c1"), "power": ("omega", "tau")}
        if kind not in needed:
            raise SpecError(f"unknown tail kind {kind!r}")
        for key in needed[kind]:
            if key not in tail_data:
                raise SpecError(f"tail of kind {kind!r} needs {key!r}")
        tail = Tail(kind, **{k: float(tail_data[k]) for k in needed[kind]})
        return cls(tuple(data.get("prefix", ())), tail)


@dataclass(frozen=True)
class CrossSpec:
    """Full parameterization of a hyperbolic cross.

    ``t`` and ``r`` are used by the Korobov family, ``p`` and ``q`` by the
    analytic family.  The sequence ``seq`` always holds every rate, so for
    the Korobov family its first ``t + 1`` entries must equal ``r``.
    """

    variant: str
    m: int
    alpha: float
    beta: float
    seq: SmoothnessSequence
    x_signed: bool = False
    y_signed: bool = False
    t: int | None = None
    r: float | None = None
    p: float = 0.0
    q: float = 0.0

    @classmethod
    def korobov(cls, t: int, r: float, m: int, alpha: float, beta: float,
                seq: SmoothnessSequence, x_signed: bool = False,
                y_signed: bool = False) -> "CrossSpec":
        return cls(KOROBOV, m, float(alpha), float(beta), seq, x_signed, y_signed,
                   t=t, r=float(r))

    @classmethod
    def analytic(cls, p: float, q: float, m: int, alpha: float, beta: float,
                 seq: SmoothnessSequence, x_signed: bool = False,
                 y_signed: bool = False) -> "CrossSpec":
        return cls(ANALYTIC, m, float(alpha), float(beta), seq, x_signed, y_signed,
                   p=float(p), q=float(q))

    @property
    def a(self) -> float:
        return self.alpha - self.beta

    @property
    def is_korobov(self) -> bool:
        return self.variant == KOROBOV

    def replace(self, **changes) -> "CrossSpec":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return CrossSpec(**data)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "variant": self.variant,
            "m": self.m,
            "alpha": self.alpha,
            "beta": self.beta,
            "x_signed": self.x_signed,
            "y_signed": self.y_signed,
        }
        if self.is_korobov:
            out.update(t=self.t, r=self.r)
        else:
            out.update(p=self.p, q=self.q)
        out["seq"] = self.seq.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CrossSpec":
        _reject_unknown(data, {"variant", "m", "alpha", "beta", "x_signed",
                               "y_signed", "t", "r", "p", "q", "seq"}, "spec")
        for key in ("variant", "m", "alpha", "beta", "seq"):
            if key not in data:
                raise SpecError(f"spec is missing {key!r}")
        variant = data["variant"]
        m = data["m"]
        if not isinstance(m, int) or isinstance(m, bool):
            raise SpecError("m must be an integer")
        seq = SmoothnessSequence.from_dict(data["seq"])
        common = dict(m=m, alpha=float(data["alpha"]), beta=float(data["beta"]), seq=seq,
                      x_signed=bool(data.get("x_signed", False)),
                      y_signed=bool(data.get("y_signed", False)))
        if variant == KOROBOV:
            if "t" not in data or "r" not in data:
                raise SpecError("korobov spec needs 't' and 'r'")
            if data.get("p") is not None or data.get("q") is not None:
                raise SpecError("korobov spec does not take 'p' or 'q'")
            t = data["t"]
            if not isinstance(t, int) or isinstance(t, bool):
                raise SpecError("t must be an integer")
            return cls.korobov(t, data["r"], **common)
        if variant == ANALYTIC:
            if "p" not in data or "q" not in data:
                raise SpecError("analytic spec needs 'p' and 'q'")
            if data.get("t") is not None or data.get("r") is not None:
                raise SpecError("analytic spec does not take 't' or 'r'")
            return cls.analytic(data["p"], data["q"], **common)
        raise SpecError(f"unknown variant {variant!r}")


def _reject_unknown(data: Mapping[str, Any], allowed: set[str], where: str) -> None:
    if not isinstance(data, Mapping):
        raise SpecError(f"{where} must be a JSON object")
    unknown = set(data) - allowed
    if unknown:
        raise SpecError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True, order=True)
class MultiIndex:
    """One point ``(k, s)``; ``s`` is stored as sorted ``(coordinate, value)`` pairs.

    Instances order lexicographically by ``(s, k)``.
    """

    s: tuple[tuple[int, int], ...]
    k: tuple[int, ...]

    @classmethod
    def of(cls, k: Iterable[int] = (), s: Mapping[int, int] | Iterable[tuple[int, int]] = ()) -> "MultiIndex":
        items = s.items() if isinstance(s, Mapping) else s
        pairs = tuple(sorted((int(j), abs(int(v))) for j, v in items if v != 0))
        if any(j < 1 for j, _ in pairs):
            raise ValueError("s coordinates are numbered from 1")
        if len({j for j, _ in pairs}) != len(pairs):
            raise ValueError("duplicate s coordinate")
        return cls(pairs, tuple(abs(int(x)) for x in k))

    @property
    def s_map(self) -> dict[int, int]:
        return dict(self.s)

    def __repr__(self) -> str:
        return f"MultiIndex(k={list(self.k)}, s={self.s_map})"


class Validation(NamedTuple):
    spec: CrossSpec
    flags: dict[str, bool]


def validate_spec(spec: CrossSpec) -> Validation:
    """Check every structural invariant; return the spec and hypothesis flags."""
    if not (spec.alpha > spec.beta >= 0):
        raise BadExponents(f"need alpha > beta >= 0, got alpha={spec.alpha}, beta={spec.beta}")
    if spec.m < 0:
        raise SpecError("m must be nonnegative")
    spec.seq.check(ordered=True)
    if spec.is_korobov:
        if spec.t is None or spec.t < 0 or spec.r is None or not spec.r > 0:
            raise SpecError("korobov spec needs integer t >= 0 and r > 0")
        if spec.m == 0:
            raise UnsupportedZeroM("m = 0 is only supported for the analytic family with p = 0")
        for j in range(1, spec.t + 2):
            if not spec.seq.has(j) or spec.seq.rate(j) != spec.r:
                raise BadPrefixBlock(f"r_1..r_{spec.t + 1} must all equal r={spec.r}")
    elif spec.variant == ANALYTIC:
        if spec.p < 0 or spec.q < 0:
            raise SpecError("analytic spec needs p >= 0 and q >= 0")
        if spec.p > 0 and not spec.q > 0:
            raise SpecError("analytic spec with p > 0 needs q > 0")
        if spec.m == 0 and spec.p != 0:
            raise UnsupportedZeroM("m = 0 is only supported for the analytic family with p = 0")
    else:
        raise SpecError(f"unknown variant {spec.variant!r}")
    return Validation(spec, hypothesis_flags(spec))


def _series_converges(seq: SmoothnessSequence) -> bool:
    return seq.tail.kind == "none" or seq.tail.unbounded


def hypothesis_flags(spec: CrossSpec) -> dict[str, bool]:
    """Which cardinality theorems apply (advisory, never raises)."""
    seq = spec.seq
    if spec.is_korobov:
        lam = max(spec.m / spec.a, 1.0 / spec.r)
        j = spec.t + 2
        rate_ok = (not seq.has(j)) or lam * seq.rate(j) > 1
        return {"korobov_theorem": bool(rate_ok and _series_converges(seq))}
    if spec.m == 0:
        return {"analytic_theorem": False}
    if spec.p == 0:
        return {"analytic_theorem": _series_converges(seq)}
    # rates are nondecreasing, so the first one is the binding case
    r1 = seq.rate(1)
    threshold = (spec.q + math.sqrt(spec.q * spec.a / spec.m)) / spec.p
    ok = r1 > spec.p * spec.q and r1 >= threshold
    return {"analytic_theorem": bool(ok and _series_converges(seq))}


# -- per-coordinate log factors ----------------------------------------------

def log_factor(spec: CrossSpec, j: int, s: int) -> float:
    """Natural log of the weight contributed by ``s_j = s``."""
    if s == 0:
        return 0.0
    r = spec.seq.rate(j)
    if spec.is_korobov:
        return r * math.log1p(s)
    if spec.p == 0:
        return r * s
    return r * s - spec.q * math.log1p(spec.p * s)


def log_k_factor(a: float, k: Iterable[int]) -> float:
    top = max((abs(x) for x in k), default=0)
    return a * math.log1p(top) if top else 0.0


def log_s_weight(spec: CrossSpec, s: Mapping[int, int] | Iterable[tuple[int, int]]) -> float:
    items = s.items() if isinstance(s, Mapping) else s
    return math.fsum(log_factor(spec, j, abs(v)) for j, v in items)


def log_weight(spec: CrossSpec, idx: MultiIndex, exponent: float | None = None) -> float:
    """Log of the weight of ``idx``; the k-part uses ``a`` unless ``exponent`` is given."""
    if len(idx.k) != spec.m:
        raise ValueError(f"index has {len(idx.k)} k-entries, spec has m={spec.m}")
    e = spec.a if exponent is None else exponent
    return log_k_factor(e, idx.k) + log_s_weight(spec, idx.s)


def in_cross(spec: CrossSpec, idx: MultiIndex, T: float) -> bool:
    if T <= 0:
        return False
    return log_weight(spec, idx) <= math.log(T) + TOL


def _argmin_coordinate(spec: CrossSpec, j: int) -> int:
    """Integer s >= 1 minimizing the (convex) log factor of coordinate j."""
    if spec.is_korobov or spec.p == 0:
        return 1
    r = spec.seq.rate(j)
    x = spec.q / r - 1.0 / spec.p
    if x <= 1:
        return 1
    lo = math.floor(x)
    return min((lo, lo + 1), key=lambda s: (log_factor(spec, j, s), s))


def min_log_factor(spec: CrossSpec, j: int) -> float:
    """Smallest log factor over s_j >= 1."""
    return log_factor(spec, j, _argmin_coordinate(spec, j))


def coordinate_range(spec: CrossSpec, j: int, budget: float) -> tuple[int, int]:
    """Interval ``[lo, hi]`` of values s >= 1 with log factor <= budget.

    The log factor is convex in s with value 0 at s = 0, so its sublevel sets
    are intervals.  An empty result is reported as ``(1, 0)``.
    """
    limit = budget + TOL
    g = lambda s: log_factor(spec, j, s)  # noqa: E731
    smin = _argmin_coordinate(spec, j)
    if g(smin) > limit:
        return 1, 0
    r = spec.seq.rate(j)
    if spec.is_korobov:
        x = limit / r
        if x > _EXP_LIMIT:
            raise CountOverflow("coordinate cap exceeds the representable range")
        hi = max(int(math.exp(x)) - 1, 1)
    elif spec.p == 0:
        hi = max(int(limit / r), 1)
    else:
        hi = _expand_hi(g, smin, limit)
    if hi > EXACT_LIMIT:
        raise CountOverflow("coordinate cap exceeds the exactly resolvable range")
    while g(hi + 1) <= limit:
        hi += 1
    while hi > smin and g(hi) > limit:
        hi -= 1
    lo = 1
    if g(1) > limit:
        # g decreases on [1, smin]: find the first value inside the budget
        left, right = 1, smin
        while right - left > 1:
            mid = (left + right) // 2
            if g(mid) <= limit:
                right = mid
            else:
                left = mid
        lo = right
    return lo, hi


def _expand_hi(g, start: int, limit: float) -> int:
    step = 1
    while g(start + step) <= limit:
        step *= 2
        if step > EXACT_LIMIT:
            raise CountOverflow("coordinate cap exceeds the exactly resolvable range")
    left, right = start + step // 2 if step > 1 else start, start + step
    while right - left > 1:
        mid = (left + right) // 2
        if g(mid) <= limit:
            left = mid
        else:
            right = mid
    return left


def coordinate_cap(spec: CrossSpec, j: int, log_budget: float) -> int:
    """Largest s with log factor <= ``log_budget``; every larger s exceeds it."""
    if log_budget < 0:
        raise PreconditionViolated("log_budget must be nonnegative")
    lo, hi = coordinate_range(spec, j, log_budget)
    return hi if hi >= lo else 0


def k_radius(a: float, budget: float) -> int:
    """Largest K with ``a * log K <= budget`` (admissible k_j lie in 0..K-1)."""
    limit = budget + TOL
    if limit < 0:
        return 0
    x = limit / a
    if x > math.log(EXACT_LIMIT):
        raise CountOverflow("k-block radius exceeds the exactly resolvable range")
    K = max(int(math.exp(x)), 1)
    while a * math.log(K + 1) <= limit:
        K += 1
    while K > 1 and a * math.log(K) > limit:
        K -= 1
    return K


class Slack(NamedTuple):
    """Negative parts of the coordinate minima (nonzero only for p > 0)."""

    total: float
    negatives: tuple[float, ...]

    def beyond(self, j: int) -> float:
        """Sum of the negative parts of coordinates strictly after j."""
        return math.fsum(self.negatives[j:])


def slack(spec: CrossSpec) -> Slack:
    if spec.is_korobov or spec.p == 0:
        return Slack(0.0, ())
    threshold = spec.p * spec.q
    negatives = []
    j = 1
    # rates >= p*q give r*s >= p*q*s >= q*log(1+p*s), i.e. no dip below zero
    while spec.seq.has(j) and spec.seq.rate(j) < threshold:
        if j > len(spec.seq.prefix) and not spec.seq.tail.unbounded:
            raise InfiniteCross("infinitely many coordinates have weight factors below 1")
        negatives.append(min(0.0, min_log_factor(spec, j)))
        j += 1
        if j > MAX_ACTIVE_DIM:
            raise HypercrossError("too many coordinates with sub-unit weight factors")
    while negatives and negatives[-1] == 0.0:
        negatives.pop()
    return Slack(math.fsum(negatives), tuple(negatives))


def active_dimension(spec: CrossSpec, T: float) -> int:
    """Largest coordinate that can carry a nonzero s-entry inside the cross.

    For the Korobov family and the analytic family with p = 0 this is the
    largest j whose unit index e_j lies in the cross.
    """
    if T < 1:
        raise PreconditionViolated("T must be >= 1")
    logT = math.log(T)
    sl = slack(spec)
    seq = spec.seq
    d = 0
    j = 1
    while seq.has(j):
        if max(min_log_factor(spec, j), 0.0) + sl.total > logT + TOL:
            break
        if j > len(seq.prefix) and not seq.tail.unbounded:
            raise InfiniteCross(f"the cross at T={T} contains e_j for every j")
        d = j
        j += 1
        if j > MAX_ACTIVE_DIM:
            raise HypercrossError("active dimension exceeds the scan limit")
    return d
