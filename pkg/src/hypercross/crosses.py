"""Exact enumeration and counting of hyperbolic crosses.

The traversal walks s-blocks depth first (ascending coordinate, then
ascending value) and counts the admissible k-block of every s-block in
closed form, so the cost is proportional to the number of distinct s-blocks
rather than to the cardinality of the cross.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import BoxTooLarge, CountOverflow, PreconditionViolated
from .weights import (
    TOL,
    CrossSpec,
    MultiIndex,
    active_dimension,
    coordinate_cap,
    coordinate_range,
    k_radius,
    log_factor,
    slack,
    validate_spec,
)

#: Counts must stay below this value (128-bit unsigned with one bit of headroom).
COUNT_LIMIT = 2**127

Pairs = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class CompressedRecord:
    """An s-block together with the closed-form size of its k-block."""

    s: Pairs
    K: int
    s_sign_multiplicity: int
    k_count: int

    @property
    def expanded_count(self) -> int:
        return self.s_sign_multiplicity * self.k_count


@dataclass(frozen=True)
class CrossCount:
    total: int
    records: int
    active_dim: int
    T: float


def _k_count(spec: CrossSpec, K: int) -> int:
    if spec.m == 0:
        return 1
    side = 2 * K - 1 if spec.x_signed else K
    return side**spec.m


class _Walker:
    """Depth-first traversal state shared by counting and enumeration."""

    def __init__(self, spec: CrossSpec, T: float, dim_cap: int | None = None):
        validate_spec(spec)
        if T < 1:
            raise PreconditionViolated(f"T must be >= 1, got {T}")
        self.spec = spec
        self.logT = math.log(T)
        dim = active_dimension(spec, T)
        if dim_cap is not None:
            dim = min(dim, max(dim_cap, 0))
        self.dim = dim
        negatives = list(slack(spec).negatives[:dim])
        negatives += [0.0] * (dim - len(negatives))
        # beyond[j]: sum of the negative coordinate minima after coordinate j
        self.beyond = [math.fsum(negatives[j:]) for j in range(dim + 1)]

    def record(self, pairs: Pairs, budget: float) -> CompressedRecord:
        spec = self.spec
        K = 1 if spec.m == 0 else k_radius(spec.a, budget)
        mult = 2 ** len(pairs) if spec.y_signed else 1
        return CompressedRecord(pairs, K, mult, _k_count(spec, K))

    def children(self, pairs: Pairs, budget: float) -> Iterator[tuple[Pairs, float]]:
        last = pairs[-1][0] if pairs else 0
        spec = self.spec
        for j in range(last + 1, self.dim + 1):
            lo, hi = coordinate_range(spec, j, budget - self.beyond[j])
            if hi < lo:
                # the coordinate minima grow with j while the slack shrinks
                break
            for v in range(lo, hi + 1):
                yield pairs + ((j, v),), budget - log_factor(spec, j, v)

    def walk(self, pairs: Pairs = (), budget: float | None = None) -> Iterator[tuple[Pairs, float]]:
        if budget is None:
            budget = self.logT
        if budget >= -TOL:
            yield pairs, budget
        for child, b in self.children(pairs, budget):
            yield from self.walk(child, b)


def enumerate_cross(spec: CrossSpec, T: float, expand: bool = False,
                    dim_cap: int | None = None) -> Iterator[CompressedRecord] | Iterator[MultiIndex]:
    """Stream the cross in lexicographic s order.

    With ``expand`` every record is unfolded into its unsigned k
    representatives; sign multiplicities stay on the records.
    """
    walker = _Walker(spec, T, dim_cap)
    records = (walker.record(p, b) for p, b in walker.walk())
    if not expand:
        return records
    return _expand(spec, records)


def _expand(spec: CrossSpec, records: Iterable[CompressedRecord]) -> Iterator[MultiIndex]:
    for rec in records:
        for k in itertools.product(range(rec.K), repeat=spec.m):
            yield MultiIndex(rec.s, k)


def _count_subtree(walker: _Walker, pairs: Pairs, budget: float) -> tuple[int, int]:
    total = 0
    n = 0
    for p, b in walker.walk(pairs, budget):
        total += walker.record(p, b).expanded_count
        n += 1
        if total > COUNT_LIMIT:
            raise CountOverflow("cross cardinality exceeds 2**127")
    return total, n


_WORKER_WALKER: _Walker | None = None


def _init_worker(spec: CrossSpec, T: float, dim_cap: int | None) -> None:
    global _WORKER_WALKER
    _WORKER_WALKER = _Walker(spec, T, dim_cap)


def _count_task(args: tuple[Pairs, float]) -> tuple[int, int]:
    return _count_subtree(_WORKER_WALKER, *args)


def count_cross(spec: CrossSpec, T: float, dim_cap: int | None = None,
                workers: int = 1) -> CrossCount:
    """Exact cardinality of the cross (including sign multiplicities).

    ``workers > 1`` distributes the subtrees rooted at the first-level
    children over processes; the integer reduction makes the result
    independent of the worker count.
    """
    walker = _Walker(spec, T, dim_cap)
    root = walker.record((), walker.logT)
    if workers <= 1:
        total, n = _count_subtree(walker, (), walker.logT)
    else:
        tasks = list(walker.children((), walker.logT))
        total, n = root.expanded_count, 1
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(spec, T, dim_cap)) as pool:
            chunk = max(1, len(tasks) // (8 * workers))
            for t, c in pool.map(_count_task, tasks, chunksize=chunk):
                total += t
                n += c
    if total > COUNT_LIMIT:
        raise CountOverflow("cross cardinality exceeds 2**127")
    return CrossCount(total, n, walker.dim, T)


# -- independent oracle --------------------------------------------------------

def _box_caps(spec: CrossSpec, T: float) -> tuple[int, list[int]]:
    # negative s-factors (p > 0 dips) can pay for a larger k or s elsewhere
    budget = math.log(T) - slack(spec).total
    kmax = math.ceil(math.exp(budget / spec.a)) if spec.m else 0
    dim = active_dimension(spec, T) + 1
    if spec.seq.length is not None:
        dim = min(dim, spec.seq.length)
    caps = [coordinate_cap(spec, j, budget) + 1 for j in range(1, dim + 1)]
    return kmax, caps


def brute_force_count(spec: CrossSpec, T: float, box: tuple[int, Sequence[int]] | None = None,
                      max_points: int = 10**8) -> CrossCount:
    """Count the cross by scanning a box that strictly contains it.

    ``box = (kmax, [c_1, ..., c_d])`` scans ``|k_j| <= kmax`` and
    ``|s_j| <= c_j``; negative values are only visited for signed blocks.
    The default box is one step larger than necessary in every direction.
    """
    validate_spec(spec)
    if T < 1:
        raise PreconditionViolated(f"T must be >= 1, got {T}")
    kmax, caps = box if box is not None else _box_caps(spec, T)
    k_vals = np.arange(-kmax if spec.x_signed else 0, kmax + 1)
    s_axes = [np.arange(-c if spec.y_signed else 0, c + 1) for c in caps]
    k_points = len(k_vals) ** spec.m
    s_points = math.prod(len(ax) for ax in s_axes)
    if k_points * s_points > max_points or k_points > 5 * 10**7 or s_points > 5 * 10**7:
        raise BoxTooLarge(f"box has {k_points * s_points} points")

    # s-part: log weights over the full s box, one coordinate at a time
    w_s = np.zeros(1)
    for j, ax in enumerate(s_axes, start=1):
        v = np.abs(ax).astype(float)
        r = spec.seq.rate(j)
        if spec.is_korobov:
            f = r * np.log1p(v)
        else:
            f = r * v - spec.q * np.log1p(spec.p * v)
        w_s = np.add.outer(w_s, f).ravel()

    # k-part: a * log max_j (1 + |k_j|) over the k box
    if spec.m:
        grids = np.meshgrid(*([np.abs(k_vals)] * spec.m), indexing="ij")
        top = np.max(np.stack([g.ravel() for g in grids]), axis=0)
        w_k = np.sort(spec.a * np.log1p(top.astype(float)))
    else:
        w_k = np.zeros(1)

    limit = math.log(T) + TOL
    inside = np.searchsorted(w_k, limit - w_s, side="right")
    total = int(inside.sum(dtype=np.int64))
    return CrossCount(total, int(np.count_nonzero(inside)), len(caps), T)


def simplex_count(rates: Sequence[float], log_budget: float) -> int:
    """Number of s in Z^d_+ with sum_j r_j s_j <= log_budget."""
    if not rates:
        raise PreconditionViolated("rates must be nonempty")

    def rec(j: int, budget: float) -> int:
        if j == len(rates):
            return 1
        r = rates[j]
        total = 0
        s = 0
        while r * s <= budget + TOL:
            total += rec(j + 1, budget - r * s)
            s += 1
        return total

    return rec(0, log_budget)


# -- CSV views -----------------------------------------------------------------

def _encode_s(pairs: Pairs) -> tuple[str, str]:
    return ";".join(str(j) for j, _ in pairs), ";".join(str(v) for _, v in pairs)


def records_csv(records: Iterable[CompressedRecord]) -> Iterator[str]:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["s_coords", "s_vals", "K", "multiplicity"])
    yield buf.getvalue()
    for rec in records:
        buf.seek(0)
        buf.truncate()
        writer.writerow([*_encode_s(rec.s), rec.K, rec.s_sign_multiplicity])
        yield buf.getvalue()


def indices_csv(indices: Iterable[MultiIndex], m: int) -> Iterator[str]:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"k{i}" for i in range(1, m + 1)] + ["s_coords", "s_vals"])
    yield buf.getvalue()
    for idx in indices:
        buf.seek(0)
        buf.truncate()
        writer.writerow([*idx.k, *_encode_s(idx.s)])
        yield buf.getvalue()
