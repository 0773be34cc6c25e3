"""Closed-form cardinality bounds and the constants they depend on.

All upper bounds are assembled in log space and exponentiated last.  The
infinite sums M(t), M_{0,q} and M_{p,q} are summed term by term; the
remainder is certified through the closed-form tail generator of the
smoothness sequence (see ``certified_sum``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from scipy import special

from .crosses import count_cross
from .errors import Diverges, HypothesisViolated, InfiniteCross, NonPositiveC, PreconditionViolated
from .weights import CrossSpec, SmoothnessSequence, k_radius, validate_spec

SUM_TOL = 1e-12
MAX_TERMS = 10_000_000

ABOVE = "r>a/m"
EQUAL = "r=a/m"
BELOW = "r<a/m"


# -- certified series ----------------------------------------------------------

def _tail_exp_sum(seq: SmoothnessSequence, J: int, kappa: float) -> float:
    """Upper bound for sum_{j > J} exp(-kappa * r_j), with J >= len(prefix)."""
    tail = seq.tail
    if tail.kind == "affine":
        if tail.c1 <= 0:
            return math.inf
        return math.exp(-kappa * tail.value(J + 1)) / -math.expm1(-kappa * tail.c1)
    # power tail: the summand decreases in j, so the integral from J dominates
    s = 1.0 / tail.tau
    x = kappa * tail.omega * J**tail.tau
    return (kappa * tail.omega) ** (-s) / tail.tau * math.gamma(s) * special.gammaincc(s, x)


def certified_sum(seq: SmoothnessSequence, start: int, term: Callable[[float], float],
                  envelope: Callable[[float], float], kappa: float,
                  chunk: int = 64, tol: float = SUM_TOL) -> tuple[float, float]:
    """Sum ``term(r_j)`` over j >= start; return (value, certified remainder).

    Every term must satisfy ``term(r) <= envelope(r) * exp(-kappa * r)`` with
    ``envelope`` nonincreasing, so the remainder after J is at most
    ``envelope(r_{J+1}) * sum_{j>J} exp(-kappa * r_j)``.
    """
    if seq.length is not None:
        return math.fsum(term(r) for r in seq.rates(seq.length)[start - 1:]), 0.0
    if seq.tail.kind == "affine" and seq.tail.c1 == 0:
        raise Diverges("constant tail rates give a divergent series")
    L = len(seq.prefix)
    terms: list[float] = []
    j = start
    while True:
        stop = max(j + chunk, L + 1)
        terms.extend(term(seq.rate(i)) for i in range(j, stop))
        j = stop
        J = j - 1
        remainder = envelope(seq.rate(J + 1)) * _tail_exp_sum(seq, J, kappa)
        if remainder < tol:
            return math.fsum(terms), remainder
        if j > MAX_TERMS:
            raise Diverges("series did not reach the requested tolerance")


# -- Korobov family ------------------------------------------------------------

@dataclass(frozen=True)
class KorobovConstants:
    lambda_exp: float
    M_t: float
    B: float
    C: float
    regime: str


def regime(a: float, r: float, m: int) -> str:
    ratio = a / m
    if math.isclose(r, ratio, rel_tol=1e-12, abs_tol=0.0):
        return EQUAL
    return ABOVE if r > ratio else BELOW


def korobov_B(a: float, r: float, m: int, t: int) -> float:
    reg = regime(a, r, m)
    if reg == ABOVE:
        x = r * m / a - 1
        return 1.5**m * (1 + 1.5 ** (-x) / x) ** t
    base = m * 2 ** (t + 1) / math.factorial(t)
    if reg == EQUAL:
        return base
    y = a / r - m
    return base / y * 2**y


def korobov_log_A(a: float, r: float, m: int, t: int, T: float) -> float:
    if T < 1:
        raise PreconditionViolated("T must be >= 1")
    logT = math.log(T)
    reg = regime(a, r, m)
    if reg == ABOVE:
        return m / a * logT
    bracket = t * math.log(logT / r + (t + 1) * math.log(2)) if t else 0.0
    if reg == EQUAL:
        return m / a * logT + math.log(math.log(2 * T ** (1 / a) + 1)) + bracket
    return logT / r + bracket


def korobov_A(a: float, r: float, m: int, t: int, T: float) -> float:
    return _exp(korobov_log_A(a, r, m, t, T))


def _require_korobov(spec: CrossSpec) -> None:
    validate_spec(spec)
    if not spec.is_korobov:
        raise HypothesisViolated("expected a Korobov spec")


def korobov_M(spec: CrossSpec, chunk: int = 64) -> float:
    _require_korobov(spec)
    lam = max(spec.m / spec.a, 1.0 / spec.r)
    start = spec.t + 2
    if not spec.seq.has(start):
        return 0.0
    if not lam * spec.seq.rate(start) > 1:
        raise HypothesisViolated(f"need lambda * r_{start} > 1, got {lam * spec.seq.rate(start)}")
    kappa = lam * math.log(1.5)

    def term(r: float) -> float:
        x = lam * r - 1
        return 1.5 ** (-x) / x

    envelope = lambda r: 1.5 / (lam * r - 1)  # noqa: E731
    try:
        value, _ = certified_sum(spec.seq, start, term, envelope, kappa, chunk)
    except Diverges as exc:
        raise Diverges(f"M(t) diverges: {exc}") from None
    return value


def korobov_constants(spec: CrossSpec, chunk: int = 64) -> KorobovConstants:
    _require_korobov(spec)
    lam = max(spec.m / spec.a, 1.0 / spec.r)
    M = korobov_M(spec, chunk)
    B = korobov_B(spec.a, spec.r, spec.m, spec.t)
    return KorobovConstants(lam, M, B, math.exp(M) * B, regime(spec.a, spec.r, spec.m))


def korobov_upper(spec: CrossSpec, T: float) -> float:
    """C * A(T) for the unsigned Korobov cross."""
    const = korobov_constants(spec)
    return _exp(math.log(const.C) + korobov_log_A(spec.a, spec.r, spec.m, spec.t, T))


# -- analytic family -----------------------------------------------------------

def analytic_constant(spec: CrossSpec, chunk: int = 64) -> float:
    """M_{0,q} for p = 0, M_{p,q} for p > 0."""
    validate_spec(spec)
    if spec.is_korobov:
        raise HypothesisViolated("expected an analytic spec")
    if spec.m == 0:
        raise HypothesisViolated("the analytic cardinality theorem needs m >= 1")
    m, a, p, q = spec.m, spec.a, spec.p, spec.q
    seq = spec.seq
    if p == 0:
        kappa = m / a
        term = lambda r: math.exp(-kappa * r) / -math.expm1(-kappa * r)  # noqa: E731
        envelope = lambda r: 1.0 / -math.expm1(-kappa * r)  # noqa: E731
        return certified_sum(seq, 1, term, envelope, kappa, chunk)[0]
    r1 = seq.rate(1)
    threshold = (q + math.sqrt(q * a / m)) / p
    # rates are nondecreasing, so checking r_1 covers every j
    if not (r1 > p * q and r1 >= threshold):
        raise HypothesisViolated(f"need r_j > pq = {p * q} and r_j >= {threshold} for all j")
    kappa = m / (2 * a)
    term = lambda r: math.exp(-kappa * r) / (m * (r - p * q) / a)  # noqa: E731
    envelope = lambda r: a / (m * (r - p * q))  # noqa: E731
    total = certified_sum(seq, 1, term, envelope, kappa, chunk)[0]
    return (1 + p / 2) ** (q * m / a) * total


def analytic_upper(spec: CrossSpec, T: float) -> float:
    M = analytic_constant(spec)
    if T < 1:
        raise PreconditionViolated("T must be >= 1")
    return _exp(2 * spec.m * math.log(1.5) + M + spec.m / spec.a * math.log(T))


# -- all sign variants ---------------------------------------------------------

def extension_constant(spec: CrossSpec) -> float:
    """Constant of the bound C * A(T) for the spec's variant and sign flags."""
    if spec.is_korobov:
        const = korobov_constants(spec)
        M, base = const.M_t, math.log(const.B)
    else:
        M, base = analytic_constant(spec), 2 * spec.m * math.log(1.5)
    log_c = base + (2 * M if spec.y_signed else M)
    if spec.x_signed:
        log_c += spec.m * math.log(2)
    return _exp(log_c)


def log_A_S(spec: CrossSpec, T: float) -> float:
    if spec.is_korobov:
        return korobov_log_A(spec.a, spec.r, spec.m, spec.t, T)
    if T < 1:
        raise PreconditionViolated("T must be >= 1")
    return spec.m / spec.a * math.log(T)


def general_upper(spec: CrossSpec, T: float) -> float:
    return _exp(math.log(extension_constant(spec)) + log_A_S(spec, T))


def lower_bound(spec: CrossSpec, T: float) -> int:
    """floor(T^{1/a})^m."""
    if T < 1:
        raise PreconditionViolated("T must be >= 1")
    return k_radius(spec.a, math.log(T)) ** spec.m


# -- finite-dimensional lemmas -------------------------------------------------

def simplex_bounds(rates: list[float], d: int, T: float) -> tuple[float, float]:
    """Lower and upper bound for the weighted simplex sum_{j<=d} r_j s_j <= log T."""
    rates = list(rates)[:d]
    if d < 1 or len(rates) < d:
        raise PreconditionViolated("need d >= 1 rates")
    logT = math.log(T) if T > 0 else -math.inf
    if any(logT < r for r in rates):
        raise PreconditionViolated("need T >= exp(r_j) for every j <= d")
    scale = math.prod(1.0 / r for r in rates) / math.factorial(d)
    return scale * logT**d, scale * (logT + math.fsum(rates)) ** d


def superexp_c(omega: float, tau: float) -> float:
    """tau + omega^(-1/tau) log(e/omega); at least tau (1 - e^(-1-1/tau)) > 0."""
    if not (omega > 0 and tau > 0):
        raise PreconditionViolated("need omega > 0 and tau > 0")
    c = tau + omega ** (-1.0 / tau) * math.log(math.e / omega)
    if not c > 0:
        raise NonPositiveC(f"c_(omega,tau) = {c} is not positive")
    return c


def superexp_bound(omega: float, tau: float, T: float) -> float:
    """exp(c * (log T)^(1/tau)) for rates r_j >= omega * j^tau and m = 0."""
    c = superexp_c(omega, tau)
    if T < 1:
        raise PreconditionViolated("T must be >= 1")
    return _exp(c * math.log(T) ** (1.0 / tau))


def gamma_upper(m: int, T: float) -> float:
    if m < 1 or T < 1:
        raise PreconditionViolated("need m >= 1 and T >= 1")
    logT = math.log(T)
    return 2**m / math.factorial(m - 1) * T * (logT + m * math.log(2)) ** (m - 1)


def gamma_H_upper(kind: str, m: int, t: int, a: float, r: float, T: float) -> float:
    if kind.lower() == "gamma":
        return gamma_upper(m, T)
    if kind.upper() == "H":
        return korobov_B(a, r, m, t) * korobov_A(a, r, m, t, T)
    raise ValueError(f"unknown lemma {kind!r}")


def gamma_spec(m: int) -> CrossSpec:
    """Korobov spec whose cross is {l in N^m : prod l_j <= T}, shifted by one."""
    ones = (1.0,) * max(m - 1, 1)
    return CrossSpec.korobov(max(m - 2, 0), 1.0, 1, 1.0, 0.0, SmoothnessSequence.finite(ones))


def gamma_count(m: int, T: float) -> int:
    return count_cross(gamma_spec(m), T, dim_cap=m - 1).total


def H_spec(m: int, t: int, a: float, r: float) -> CrossSpec:
    return CrossSpec.korobov(t, r, m, a, 0.0, SmoothnessSequence.finite((r,) * (t + 1)))


def H_count(m: int, t: int, a: float, r: float, T: float) -> int:
    return count_cross(H_spec(m, t, a, r), T).total


# -- reports -------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    T: float
    lower: int
    exact: int | None
    upper: float | None
    hypotheses_ok: bool
    constant_used: float | None
    constants: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        if self.exact is None:
            return True
        if self.lower > self.exact:
            return False
        if self.hypotheses_ok and self.upper is not None:
            return self.exact <= self.upper * (1 + 1e-9)
        return True


def constants_of(spec: CrossSpec) -> dict:
    """Every constant of the spec's theorem, as plain numbers."""
    if spec.is_korobov:
        const = korobov_constants(spec)
        return {"lambda_exp": const.lambda_exp, "M_t": const.M_t, "B": const.B, "C": const.C,
                "regime": const.regime, "extension_constant": extension_constant(spec)}
    return {"M": analytic_constant(spec), "extension_constant": extension_constant(spec)}


def sandwich_report(spec: CrossSpec, T: float, exact: bool = True,
                    dim_cap: int | None = None) -> BoundReport:
    """Lower bound, exact count and certified upper bound for one threshold.

    Failed theorem hypotheses do not raise: the report carries the lower
    bound and the exact count with ``hypotheses_ok=False``.  An infinite
    cross has no exact count and is reported with ``exact=None``.
    """
    validate_spec(spec)
    if T < 1:
        raise PreconditionViolated("T must be >= 1")
    lower = lower_bound(spec, T)
    count = None
    if exact:
        try:
            count = count_cross(spec, T, dim_cap=dim_cap).total
        except InfiniteCross:
            count = None
    try:
        constants = constants_of(spec)
        upper = _exp(math.log(constants["extension_constant"]) + log_A_S(spec, T))
        return BoundReport(T, lower, count, upper, True, constants["extension_constant"], constants)
    except HypothesisViolated:
        return BoundReport(T, lower, count, None, False, None, {})


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf
