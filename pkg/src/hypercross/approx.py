"""Coefficient-space approximation on hyperbolic crosses.

A function is represented by its coefficients with respect to an orthonormal
tensor basis, so every norm is a weighted l2 sum (Parseval).  The smooth norm
weights an index by ``(1 + max k)^alpha`` times the s-part of the cross
weight, the rough norm by ``(1 + max k)^beta``; their ratio is the cross
weight with exponent ``a = alpha - beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .crosses import count_cross, enumerate_cross
from .errors import BoundViolated, PreconditionViolated, SupportOutsideCross
from .weights import (
    TOL,
    CrossSpec,
    MultiIndex,
    active_dimension,
    coordinate_cap,
    k_radius,
    log_factor,
    log_k_factor,
    log_weight,
    validate_spec,
)

REL_TOL = 1e-12


class CoefficientField:
    """Finite sparse map MultiIndex -> coefficient, iterated in index order."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[MultiIndex, float] | Iterable[tuple[MultiIndex, float]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data: dict[MultiIndex, float] = {}
        for idx, c in items:
            c = float(c)
            if c != 0.0:
                data[idx] = c
        self._entries = dict(sorted(data.items()))

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self._entries)

    def __getitem__(self, idx: MultiIndex) -> float:
        return self._entries.get(idx, 0.0)

    def __eq__(self, other) -> bool:
        return isinstance(other, CoefficientField) and self._entries == other._entries

    def __repr__(self) -> str:
        return f"CoefficientField({len(self)} entries)"

    def items(self):
        return self._entries.items()

    def __add__(self, other: "CoefficientField") -> "CoefficientField":
        out = dict(self._entries)
        for idx, c in other.items():
            out[idx] = out.get(idx, 0.0) + c
        return CoefficientField(out)

    def __sub__(self, other: "CoefficientField") -> "CoefficientField":
        return self + other.scale(-1.0)

    def scale(self, factor: float) -> "CoefficientField":
        return CoefficientField((idx, factor * c) for idx, c in self.items())


class NormPair(NamedTuple):
    h_norm: float
    g_norm: float


def _weighted_l2(logs: Sequence[float]) -> float:
    """sqrt(sum exp(2 * l)) without overflow, summed in the given order."""
    if not logs:
        return 0.0
    top = max(logs)
    return math.exp(top) * math.sqrt(math.fsum(math.exp(2 * (x - top)) for x in logs))


def log_h_weight(spec: CrossSpec, idx: MultiIndex) -> float:
    return log_weight(spec, idx, exponent=spec.alpha)


def log_g_weight(spec: CrossSpec, idx: MultiIndex) -> float:
    return log_k_factor(spec.beta, idx.k)


def norms(field: CoefficientField, spec: CrossSpec) -> NormPair:
    h = [log_h_weight(spec, idx) + math.log(abs(c)) for idx, c in field.items()]
    g = [log_g_weight(spec, idx) + math.log(abs(c)) for idx, c in field.items()]
    return NormPair(_weighted_l2(h), _weighted_l2(g))


def project(field: CoefficientField, spec: CrossSpec, T: float) -> CoefficientField:
    """Keep the entries whose cross weight is at most T."""
    if T <= 0:
        return CoefficientField()
    limit = math.log(T) + TOL
    return CoefficientField((idx, c) for idx, c in field.items() if log_weight(spec, idx) <= limit)


class JacksonGap(NamedTuple):
    error: float
    bound: float


def jackson_gap(field: CoefficientField, spec: CrossSpec, T: float, check: bool = True) -> JacksonGap:
    """Rough-norm projection error against the bound (smooth norm) / T."""
    if T < 1:
        raise PreconditionViolated("T must be >= 1")
    error = norms(field - project(field, spec, T), spec).g_norm
    bound = norms(field, spec).h_norm / T
    if check and error > bound * (1 + REL_TOL):
        raise BoundViolated(f"projection error {error} exceeds {bound}")
    return JacksonGap(error, bound)


def bernstein_ratio(field: CoefficientField, spec: CrossSpec, T: float, check: bool = True) -> float:
    """Smooth-to-rough norm ratio of a field supported in the cross."""
    limit = math.log(T) + TOL if T > 0 else -math.inf
    outside = [idx for idx in field if log_weight(spec, idx) > limit]
    if outside:
        raise SupportOutsideCross(f"{len(outside)} entries outside the cross, e.g. {outside[0]}")
    n = norms(field, spec)
    if n.g_norm == 0:
        return 0.0
    ratio = n.h_norm / n.g_norm
    if check and ratio > T * (1 + REL_TOL):
        raise BoundViolated(f"norm ratio {ratio} exceeds T={T}")
    return ratio


def unit_field(spec: CrossSpec, idx: MultiIndex) -> CoefficientField:
    """Single coefficient with unit smooth norm."""
    return CoefficientField({idx: math.exp(-log_h_weight(spec, idx))})


class WorstCase(NamedTuple):
    field: CoefficientField
    index: MultiIndex
    ratio: float
    attained_gap: float


def _search_threshold(spec: CrossSpec, T: float) -> float:
    """A threshold whose cross contains the s-block of some index just outside T."""
    logT = math.log(T)
    # s_1 one step beyond its cap lies outside the cross
    s1 = coordinate_cap(spec, 1, logT) + 1
    best = log_factor(spec, 1, s1)
    if spec.m:
        best = min(best, spec.a * math.log(k_radius(spec.a, logT) + 1))
    return math.exp(best)


def worst_case_element(spec: CrossSpec, T: float) -> WorstCase:
    """Unit-norm single coefficient outside the cross with the largest projection error.

    That index has the smallest cross weight strictly above T.  Exact ties in
    the weight go to the smallest k, then the smallest s (coordinate order).
    """
    validate_spec(spec)
    if T < 1:
        raise PreconditionViolated("T must be >= 1")
    logT = math.log(T)
    limit = logT + TOL
    m = spec.m
    candidates: list[tuple[float, tuple, MultiIndex]] = []
    for rec in enumerate_cross(spec, _search_threshold(spec, T)):
        w_s = math.fsum(log_factor(spec, j, v) for j, v in rec.s)
        if w_s > limit:
            idx = MultiIndex(rec.s, (0,) * m)
            value = w_s
        elif m:
            K = k_radius(spec.a, logT - w_s)
            idx = MultiIndex(rec.s, (0,) * (m - 1) + (K,))
            value = spec.a * math.log1p(K) + w_s
        else:
            continue
        candidates.append((value, (idx.k, idx.s), idx))
    best_value = min(c[0] for c in candidates)
    tied = [c for c in candidates if c[0] <= best_value + REL_TOL * max(1.0, abs(best_value))]
    value, _, idx = min(tied, key=lambda c: c[1])
    field = unit_field(spec, idx)
    return WorstCase(field, idx, math.exp(value), math.exp(-value))


class EpsDimension(NamedTuple):
    n: int
    bracket: tuple[int, int]


def eps_dimension(spec: CrossSpec, eps: float, dim_cap: int | None = None) -> EpsDimension:
    """|G(1/eps)| and the bracket [|G(1/eps)| - 1, |G(1/eps)|] for the eps-dimension."""
    if not (0 < eps <= 1):
        raise PreconditionViolated("eps must lie in (0, 1]")
    n = count_cross(spec, 1.0 / eps, dim_cap=dim_cap).total
    return EpsDimension(n, (n - 1, n))


@dataclass(frozen=True)
class RateStudy:
    eps: tuple[float, ...]
    n: tuple[int, ...]
    slope_running: tuple[float | None, ...]
    slope: float
    theory: float


def _fit(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(x, y, 1)[0])


def rate_study(spec: CrossSpec, eps_grid: Sequence[float]) -> RateStudy:
    """Least-squares slope of log n_eps against log(1/eps)."""
    eps = sorted((float(e) for e in eps_grid), reverse=True)
    if len(eps) < 5:
        raise PreconditionViolated("need at least 5 eps values")
    counts = [eps_dimension(spec, e).n for e in eps]
    x = np.log(1.0 / np.array(eps))
    y = np.log(np.array(counts, dtype=float))
    running: list[float | None] = [None]
    for i in range(2, len(eps) + 1):
        running.append(_fit(x[:i], y[:i]) if x[i - 1] > x[0] else None)
    theory = spec.m / spec.a
    return RateStudy(tuple(eps), tuple(counts), tuple(running), _fit(x, y), theory)


def dyadic_grid(lo: int, hi: int) -> list[float]:
    return [2.0**-k for k in range(lo, hi + 1)]


def random_field(spec: CrossSpec, rng: np.random.Generator, n_terms: int = 8,
                 T_range: float = 32.0) -> CoefficientField:
    """Random coefficients in [-1, 1] on indices within the active range at ``T_range``."""
    logT = math.log(T_range)
    K = k_radius(spec.a, logT) if spec.m else 0
    d = active_dimension(spec, T_range) + 1
    if spec.seq.length is not None:
        d = min(d, spec.seq.length)
    caps = [coordinate_cap(spec, j, logT) + 1 for j in range(1, d + 1)]
    entries = {}
    for _ in range(n_terms):
        k = tuple(int(v) for v in rng.integers(0, K + 1, size=spec.m))
        s = {}
        for j, cap in enumerate(caps, start=1):
            if rng.random() < 0.5:
                s[j] = int(rng.integers(0, cap + 1))
        entries[MultiIndex.of(k, s)] = float(rng.uniform(-1.0, 1.0))
    return CoefficientField(entries)
