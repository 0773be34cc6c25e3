import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercross.errors import (
    BadExponents,
    BadPrefixBlock,
    InfiniteCross,
    NonMonotoneSequence,
    NonPositiveRate,
    PreconditionViolated,
    SpecError,
    UnsupportedZeroM,
)
from hypercross.weights import (
    CrossSpec,
    _argmin_coordinate,
    min_log_factor,
    slack,
    MultiIndex,
    SmoothnessSequence,
    Tail,
    active_dimension,
    coordinate_cap,
    in_cross,
    log_factor,
    log_weight,
    validate_spec,
)
from matrix import BASE_SPECS, SPEC_A1, SPEC_A2, SPEC_K1

AFF = SmoothnessSequence.affine


def test_validate_examples(spec_k1, spec_a2):
    assert validate_spec(spec_k1).flags == {"korobov_theorem": True}
    assert validate_spec(spec_a2).flags == {"analytic_theorem": True}
    assert spec_a2.seq.rate(1) > spec_a2.p * spec_a2.q
    assert spec_a2.seq.rate(1) >= (0.5 + math.sqrt(0.5)) / 2


@pytest.mark.parametrize("spec, err", [
    (CrossSpec.korobov(0, 2, 1, 2, 1, SmoothnessSequence.finite([2, 1])), NonMonotoneSequence),
    (CrossSpec.korobov(0, 2, 1, 2, 1, AFF(3, -1, prefix=[2])), NonMonotoneSequence),
    (CrossSpec.korobov(0, 2, 1, 2, 1, AFF(0, 1, prefix=[2, 4])), NonMonotoneSequence),
    (CrossSpec.korobov(1, 1, 1, 2, 1, AFF(0, 1, prefix=[1, 1.5])), BadPrefixBlock),
    (CrossSpec.korobov(0, 1, 1, 1, 1, AFF(0, 1)), BadExponents),
    (CrossSpec.analytic(0, 0, 1, 2, -1, AFF(0, 1)), BadExponents),
    (CrossSpec.analytic(0, 0, 1, 2, 1, SmoothnessSequence.finite([0, 1])), NonPositiveRate),
    (CrossSpec.korobov(0, 1, 0, 2, 1, AFF(0, 1)), UnsupportedZeroM),
    (CrossSpec.analytic(1, 1, 0, 2, 1, AFF(0, 1)), UnsupportedZeroM),
    (CrossSpec.analytic(1, 0, 1, 2, 1, AFF(0, 1)), SpecError),
])
def test_validate_rejects(spec, err):
    with pytest.raises(err):
        validate_spec(spec)


def test_hypothesis_flag_false_for_slow_tail():
    spec = CrossSpec.korobov(0, 1, 1, 1, 0, AFF(1, 0, prefix=[1]))
    assert validate_spec(spec).flags == {"korobov_theorem": False}


def test_log_weight_examples(spec_k1, spec_a1, spec_a2):
    assert log_weight(spec_k1, MultiIndex.of([3], {1: 1})) == pytest.approx(math.log(8), abs=1e-14)
    assert log_weight(spec_a1, MultiIndex.of([0], {2: 1})) == pytest.approx(2.0, abs=1e-14)
    assert log_weight(spec_a2, MultiIndex.of([0], {1: 1})) == pytest.approx(1.5 - 0.5 * math.log(3), abs=1e-14)
    assert log_weight(spec_a2, MultiIndex.of([0], {1: 1})) == pytest.approx(0.95069, abs=1e-5)


def test_log_weight_rejects_wrong_length(spec_k1):
    with pytest.raises(ValueError):
        log_weight(spec_k1, MultiIndex.of([1, 2]))


def test_multi_index_normalization():
    idx = MultiIndex.of([-2], {3: -1, 1: 2, 2: 0})
    assert idx.k == (2,)
    assert idx.s == ((1, 2), (3, 1))
    with pytest.raises(ValueError):
        MultiIndex.of([0], {0: 1})


def test_active_dimension_examples(spec_k1, spec_a1):
    assert active_dimension(spec_k1, 4) == 2
    assert active_dimension(spec_a1, 8) == 2
    assert active_dimension(spec_k1, 1.5) == 0
    with pytest.raises(PreconditionViolated):
        active_dimension(spec_k1, 0.5)


def test_active_dimension_infinite_cross():
    spec = CrossSpec.analytic(0, 0, 1, 2, 1, AFF(1, 0))
    with pytest.raises(InfiniteCross):
        active_dimension(spec, 10)


def test_coordinate_cap_examples(spec_k1, spec_a1, spec_a2):
    assert coordinate_cap(spec_k1, 1, math.log(4)) == 3
    assert coordinate_cap(spec_a1, 2, math.log(8)) == 1
    # factor(s) = (1 + 2s)^(-1/2) e^(1.5 s): f(1) ~ 2.588, f(2) ~ 8.98 > 8
    assert math.exp(log_factor(spec_a2, 1, 1)) == pytest.approx(2.588, abs=1e-3)
    assert math.exp(log_factor(spec_a2, 1, 2)) == pytest.approx(8.98, abs=1e-2)
    assert coordinate_cap(spec_a2, 1, math.log(8)) == 1
    with pytest.raises(PreconditionViolated):
        coordinate_cap(spec_k1, 1, -1.0)


def test_json_roundtrip_and_unknown_keys(spec_k1, spec_a2):
    for spec in (spec_k1, spec_a2, CrossSpec.analytic(0, 0, 1, 2, 1, SmoothnessSequence.power(1, 2, prefix=[0.5]))):
        text = json.dumps(spec.to_dict())
        assert CrossSpec.from_dict(json.loads(text)) == spec
    data = spec_k1.to_dict()
    data["extra"] = 1
    with pytest.raises(SpecError):
        CrossSpec.from_dict(data)
    data = spec_k1.to_dict()
    data["seq"]["tail"]["gamma"] = 2
    with pytest.raises(SpecError):
        CrossSpec.from_dict(data)
    data = spec_k1.to_dict()
    data["p"] = 1
    with pytest.raises(SpecError):
        CrossSpec.from_dict(data)


# -- properties ----------------------------------------------------------------

SPECS = list(BASE_SPECS.values())
spec_st = st.sampled_from(SPECS)


def _random_index(spec, draw):
    k = draw(st.lists(st.integers(0, 30), min_size=spec.m, max_size=spec.m))
    s = draw(st.dictionaries(st.integers(1, 12), st.integers(0, 8), max_size=5))
    return MultiIndex.of(k, s)


@given(spec_st)
def test_zero_index_has_zero_weight(spec):
    assert log_weight(spec, MultiIndex.of([0] * spec.m)) == 0.0


@settings(max_examples=200)
@given(st.data())
def test_korobov_monotonicity(data):
    spec = data.draw(st.sampled_from([s for s in SPECS if s.is_korobov]))
    idx = _random_index(spec, data.draw)
    base = log_weight(spec, idx)
    # raising the largest k entry strictly increases the weight
    k = list(idx.k)
    top = max(range(len(k)), key=lambda i: k[i])
    k[top] += 1
    assert log_weight(spec, MultiIndex(idx.s, tuple(k))) > base
    # raising any other k entry never decreases it
    for i in range(len(idx.k)):
        k = list(idx.k)
        k[i] += 1
        assert log_weight(spec, MultiIndex(idx.s, tuple(k))) >= base
    j = data.draw(st.integers(1, 12))
    s = idx.s_map
    s[j] = s.get(j, 0) + 1
    assert log_weight(spec, MultiIndex.of(idx.k, s)) > base


@settings(max_examples=60, deadline=None)
@given(spec_st, st.floats(0.0, 6.0))
def test_cap_soundness(spec, budget):
    for j in range(1, 21):
        if not spec.seq.has(j):
            break
        cap = coordinate_cap(spec, j, budget)
        if cap:
            assert log_factor(spec, j, cap) <= budget + 1e-12
        for v in range(cap + 1, cap + 101):
            assert log_factor(spec, j, v) > budget


@settings(max_examples=60, deadline=None)
@given(spec_st, st.floats(1.0, 200.0))
def test_active_dimension_soundness(spec, T):
    d = active_dimension(spec, T)
    if spec.is_korobov or spec.p == 0:
        for j in range(1, d + 25):
            if not spec.seq.has(j):
                break
            unit = MultiIndex.of([0] * spec.m, {j: 1})
            assert in_cross(spec, unit, T) == (j <= d)
        return
    # p > 0: coordinate d is reachable by combining every dipping coordinate
    # at its minimum, while coordinate d + 1 cannot be reached at all
    sl = slack(spec)
    if d:
        s = {j: _argmin_coordinate(spec, j) for j in range(1, len(sl.negatives) + 1)}
        s[d] = _argmin_coordinate(spec, d)
        assert in_cross(spec, MultiIndex.of([0] * spec.m, s), T)
    if spec.seq.has(d + 1):
        assert min_log_factor(spec, d + 1) + sl.total > math.log(T)


@given(st.floats(0.1, 5), st.floats(0, 3), st.integers(0, 6))
def test_seam_continuity(c0, c1, L):
    tail = Tail("affine", c0=c0, c1=c1)
    prefix = [tail.value(j) for j in range(1, L + 1)]
    seq = SmoothnessSequence(tuple(prefix), tail)
    for j in range(1, L + 4):
        assert seq.rate(j) == tail.value(j)
    if L:
        assert seq.rate(L) == tail.value(L)
