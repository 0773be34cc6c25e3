import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercross.bounds import (
    ABOVE,
    BELOW,
    EQUAL,
    H_count,
    analytic_constant,
    analytic_upper,
    extension_constant,
    gamma_count,
    gamma_H_upper,
    korobov_A,
    korobov_B,
    korobov_constants,
    korobov_M,
    korobov_upper,
    lower_bound,
    sandwich_report,
    simplex_bounds,
    superexp_bound,
    superexp_c,
)
from hypercross.crosses import count_cross, simplex_count
from hypercross.errors import Diverges, HypothesisViolated, PreconditionViolated
from hypercross.weights import CrossSpec, SmoothnessSequence
from matrix import BASE_SPECS, T_GRID, signed_specs

AFF = SmoothnessSequence.affine
ORACLE_K2 = 0.5 * math.log(5) - 2 / 3


def test_korobov_constants_examples(spec_k1, spec_k2):
    c = korobov_constants(spec_k1)
    assert c.lambda_exp == 1
    assert c.M_t == pytest.approx(math.log(3), abs=1e-10)
    assert c.B == 2 and c.regime == EQUAL
    assert c.C == pytest.approx(6, abs=1e-9)
    c = korobov_constants(spec_k2)
    assert c.B == 1.5 and c.regime == ABOVE
    assert c.M_t == pytest.approx(ORACLE_K2, abs=1e-12)
    assert c.C == pytest.approx(1.72205, abs=1e-5)


def test_korobov_constants_violations():
    with pytest.raises(HypothesisViolated):
        korobov_constants(CrossSpec.korobov(0, 1, 1, 1, 0, AFF(1, 0, prefix=[1])))
    with pytest.raises(HypothesisViolated):
        korobov_constants(CrossSpec.analytic(0, 0, 1, 2, 1, AFF(0, 1)))
    # lambda * r_{t+2} > 1 but bounded rates: the tail sum diverges
    with pytest.raises(Diverges):
        korobov_M(CrossSpec.korobov(0, 1, 1, 1, 0, AFF(2, 0, prefix=[1])))


@pytest.mark.parametrize("chunk", [1, 3, 17, 64, 1000])
def test_sums_reproducible_across_chunks(chunk, spec_k1, spec_k2, spec_a1, spec_a2):
    assert abs(korobov_M(spec_k1, chunk) - math.log(3)) < 1e-10
    assert abs(korobov_M(spec_k2, chunk) - ORACLE_K2) < 1e-10
    assert abs(analytic_constant(spec_a1, chunk) - analytic_constant(spec_a1)) < 1e-10
    assert abs(analytic_constant(spec_a2, chunk) - analytic_constant(spec_a2)) < 1e-10


def test_power_tail_sum_matches_direct_sum():
    spec = CrossSpec.analytic(0, 0, 1, 2, 1, SmoothnessSequence.power(1.0, 1.5, prefix=[0.5]))
    direct = 1 / math.expm1(0.5) + math.fsum(1 / math.expm1(j**1.5) for j in range(2, 60))
    assert analytic_constant(spec) == pytest.approx(direct, abs=1e-11)


def test_korobov_upper_examples(spec_k1, spec_k2):
    assert korobov_upper(spec_k1, 4) == pytest.approx(6 * 4 * math.log(9), rel=1e-10)
    assert korobov_upper(spec_k1, 4) == pytest.approx(52.733, abs=1e-3)
    assert korobov_upper(spec_k1, 1) == pytest.approx(6 * math.log(3), rel=1e-10)
    assert korobov_upper(spec_k2, 16) == pytest.approx(27.55, abs=1e-2)


def test_analytic_constant_examples(spec_a1, spec_a2):
    assert analytic_constant(spec_a1) == pytest.approx(0.8202, abs=1e-4)
    direct = math.fsum(1 / math.expm1(j) for j in range(1, 60))
    assert analytic_constant(spec_a1) == pytest.approx(direct, abs=1e-12)
    oracle = math.sqrt(2) * math.fsum(math.exp(-0.75 * j) / (1.5 * j - 1) for j in range(1, 200))
    assert analytic_constant(spec_a2) == pytest.approx(oracle, abs=1e-11)
    assert analytic_constant(spec_a2) == pytest.approx(1.5589, abs=1e-4)
    with pytest.raises(Diverges):
        analytic_constant(CrossSpec.analytic(0, 0, 1, 2, 1, AFF(1, 0)))
    with pytest.raises(HypothesisViolated):
        analytic_constant(BASE_SPECS["A-dip"])
    with pytest.raises(HypothesisViolated):
        analytic_constant(BASE_SPECS["A-m0"])


def test_extension_constant_examples(spec_k1, spec_a1):
    assert extension_constant(spec_k1.replace(x_signed=True)) == pytest.approx(12, rel=1e-9)
    assert extension_constant(spec_k1.replace(y_signed=True)) == pytest.approx(18, rel=1e-9)
    both = extension_constant(spec_a1.replace(x_signed=True, y_signed=True))
    assert both == pytest.approx(2 * 2.25 * math.exp(2 * analytic_constant(spec_a1)), rel=1e-12)
    assert both == pytest.approx(23.21, abs=1e-2)
    assert extension_constant(spec_k1) == pytest.approx(korobov_constants(spec_k1).C, rel=1e-12)


def test_lower_bound_examples(spec_k1):
    spec = CrossSpec.korobov(0, 1, 2, 1, 0, AFF(0, 1))
    assert lower_bound(spec, 3) == 9
    assert lower_bound(spec_k1, 4) == 4
    for s in BASE_SPECS.values():
        assert lower_bound(s, 1) == 1
    # floored root is exact for perfect powers
    assert lower_bound(CrossSpec.korobov(0, 1, 1, 3, 0, AFF(0, 1)), 27) == 3


def test_regime_case_split():
    a, m, t = 1.0, 1, 2
    T = 50.0
    logT = math.log(T)
    bracket = (logT / 2 + 3 * math.log(2)) ** t
    assert korobov_A(a, 2.0, m, t, T) == pytest.approx(T, rel=1e-12)
    assert korobov_A(a, 1.0, m, t, T) == pytest.approx(T * math.log(2 * T + 1) * (logT + 3 * math.log(2)) ** t, rel=1e-12)
    assert korobov_A(a, 0.5, m, t, T) == pytest.approx(T**2 * (logT / 0.5 + 3 * math.log(2)) ** t, rel=1e-12)
    assert bracket > 0
    assert korobov_B(1, 2, 1, 2) == pytest.approx(1.5 * (1 + 1.5**-1) ** 2)
    assert korobov_B(1, 1, 1, 2) == pytest.approx(2**3 / 2)
    assert korobov_B(1, 0.5, 1, 2) == pytest.approx(2**3 / 2 * 2)


def test_sandwich_examples(spec_k1, spec_a1):
    r = sandwich_report(spec_k1, 4)
    assert (r.lower, r.exact, r.hypotheses_ok) == (4, 9, True)
    assert r.upper == pytest.approx(52.73, abs=1e-2)
    r = sandwich_report(spec_a1, 8)
    assert (r.lower, r.exact) == (8, 12)
    assert r.upper == pytest.approx(40.88, abs=1e-2)
    r = sandwich_report(spec_a1, 1)
    assert (r.lower, r.exact) == (1, 1)
    assert r.upper == pytest.approx(5.11, abs=1e-2)
    assert analytic_upper(spec_a1, 8) == pytest.approx(40.88, abs=1e-2)


def test_sandwich_without_hypotheses():
    r = sandwich_report(BASE_SPECS["A-dip"], 5)
    assert not r.hypotheses_ok and r.upper is None
    assert r.exact == count_cross(BASE_SPECS["A-dip"], 5).total
    r = sandwich_report(CrossSpec.korobov(0, 1, 1, 1, 0, AFF(1, 0, prefix=[1])), 4)
    assert not r.hypotheses_ok and r.exact is None and r.lower == 4


@pytest.mark.parametrize("name, spec", list(signed_specs()))
def test_sandwich_matrix(name, spec):
    for T in T_GRID + (250.0, 1000.0):
        r = sandwich_report(spec, T)
        assert r.lower <= r.exact
        if r.hypotheses_ok:
            assert r.exact <= r.upper * (1 + 1e-9), (name, T, r)


def test_gamma_H_examples():
    assert gamma_count(2, 4) == 8
    assert gamma_H_upper("Gamma", 2, 0, 1, 1, 4) == pytest.approx(16 * (math.log(4) + 2 * math.log(2)), rel=1e-12)
    assert H_count(1, 0, 1, 1, 4) == 8
    assert gamma_H_upper("H", 1, 0, 1, 1, 4) == pytest.approx(2 * 4 * math.log(9), rel=1e-12)
    assert gamma_H_upper("H", 1, 0, 1, 1, 4) == pytest.approx(17.58, abs=1e-2)
    assert gamma_count(1, 10) == 10
    assert gamma_H_upper("Gamma", 1, 0, 1, 1, 10) == 20


def _gamma_direct(m, T):
    def rec(i, budget):
        if i == m:
            return 1
        return sum(rec(i + 1, budget / l) for l in range(1, int(budget + 1e-9) + 1))
    return rec(0, T)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_gamma_domination(m):
    for T in (1, 2, 4, 7.5, 30, 200):
        exact = gamma_count(m, T)
        assert exact == _gamma_direct(m, T)
        assert exact <= gamma_H_upper("Gamma", m, 0, 1, 1, T)


@pytest.mark.parametrize("m, t, a, r", [(1, 0, 1, 1), (1, 1, 1, 2), (2, 1, 2, 1), (2, 2, 1, 0.6), (3, 0, 1.5, 0.5)])
def test_H_domination(m, t, a, r):
    for T in (1, 3, 10, 50, 300 if r >= 1 else 60):
        assert H_count(m, t, a, r, T) <= gamma_H_upper("H", m, t, a, r, T)


def simplex_grid():
    rate_sets = [[1.0], [0.5, 1.0], [1.0, 1.0], [1.0, 2.0], [0.3, 0.7, 1.3], [1, 1, 1, 1], [0.5, 0.8, 1.1, 1.4, 2.0]]
    for rates in rate_sets:
        for d in range(1, len(rates) + 1):
            lo = max(rates[:d])
            for k in range(6):
                yield rates, d, math.exp(lo + 0.75 * k)


def test_simplex_examples():
    assert simplex_bounds([1, 1], 2, math.e**2) == pytest.approx((2, 8))
    assert simplex_bounds([1, 2], 2, math.e**2) == pytest.approx((1, 6.25))
    assert simplex_bounds([1], 1, math.e) == pytest.approx((1, 2))
    with pytest.raises(PreconditionViolated):
        simplex_bounds([1, 3], 2, math.e**2)


def test_simplex_sandwich():
    for rates, d, T in simplex_grid():
        lo, hi = simplex_bounds(rates, d, T)
        exact = simplex_count(rates[:d], math.log(T))
        assert lo <= exact <= hi, (rates, d, T)


def test_superexp_examples():
    assert superexp_c(math.e, 1) == pytest.approx(1)
    assert superexp_bound(math.e, 1, 20) == pytest.approx(20)
    assert superexp_c(1, 2) == pytest.approx(3)
    assert superexp_bound(1, 2, 50) == pytest.approx(math.exp(3 * math.sqrt(math.log(50))))
    assert superexp_c(0.5, 1) == pytest.approx(1 + 2 * math.log(2 * math.e))
    with pytest.raises(PreconditionViolated):
        superexp_c(0, 1)
    with pytest.raises(PreconditionViolated):
        superexp_c(1, -1)


@given(st.floats(1e-3, 1e3), st.floats(0.05, 20))
def test_superexp_c_positive(omega, tau):
    # the minimum over omega is tau (1 - exp(-1 - 1/tau))
    c = superexp_c(omega, tau)
    assert c >= tau * (1 - math.exp(-1 - 1 / tau)) * (1 - 1e-12)


def m0_spec(omega, tau):
    return CrossSpec.analytic(0, 0, 0, 2, 1, SmoothnessSequence.power(omega, tau))


@pytest.mark.parametrize("omega", [1.0, math.e])
@pytest.mark.parametrize("tau", [1.0, 2.0])
def test_superexp_domination(omega, tau):
    spec = m0_spec(omega, tau)
    for k in range(1, 9):
        T = math.exp(k)
        assert count_cross(spec, T).total <= superexp_bound(omega, tau, T)


def test_inline_linear_claim():
    spec = m0_spec(math.e, 1.0)
    for k in range(1, 9):
        T = math.exp(k)
        assert count_cross(spec, T).total <= math.e / (2 * math.pi) * T


def test_H_product_has_t_plus_one_factors():
    # above the critical rate, the sum over the last t + 1 coordinates is a
    # product of t + 1 identical factors; the count outgrows the t-th power
    m, t, a, r = 1, 0, 1.0, 2.0
    x = r * m / a - 1
    factor = 1 + 1.5**-x / x
    for T in (100.0, 1000.0, 10000.0):
        n = H_count(m, t, a, r, T)
        assert n > gamma_H_upper("H", m, t, a, r, T)
        assert n <= 1.5**m * factor ** (t + 1) * T ** (m / a)
