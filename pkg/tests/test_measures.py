import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmot.errors import CapacityError, ValidationError
from mmot.measures import (
    Marginal,
    PairMeasure,
    QuantizedMeasure,
    SAEState,
    StateSpace,
    SymmetricPlan,
    count_quantized,
    enumerate_quantized,
    marginal_k,
    occupation_array,
    plan_from_maps,
    symmetrize,
)

EXAMPLE1_PLAN = {(0, 0, 1): 0.5, (1, 2, 2): 0.5}


def test_state_space_defaults_and_validation():
    s = StateSpace(3)
    assert s.labels == ("a1", "a2", "a3")
    with pytest.raises(ValidationError):
        StateSpace(0)
    with pytest.raises(ValidationError):
        StateSpace(2, labels=("x", "x"))
    with pytest.raises(ValidationError):
        StateSpace(2, coordinates=[[0.0], [np.nan]])


def test_marginal_validation():
    with pytest.raises(ValidationError):
        Marginal([0.5, 0.6])
    with pytest.raises(ValidationError):
        Marginal([1.5, -0.5])
    with pytest.raises(ValidationError):
        Marginal([])
    m = Marginal([0.25, 0.75])
    assert m.l == 2
    with pytest.raises(ValueError):
        m.weights[0] = 1.0


def test_marginal_fractions_and_quantize():
    m = Marginal.from_fractions(["2/3", "1/3", 0])
    assert m.as_fractions() == (Fraction(2, 3), Fraction(1, 3), Fraction(0))
    assert m.quantize(3).rho == (2, 1, 0)
    assert m.quantize(6).rho == (4, 2, 0)
    assert m.quantize(4) is None
    assert Marginal.uniform(4).is_uniform()
    assert Marginal.dirac(1, 3).weights.tolist() == [0.0, 1.0, 0.0]


@pytest.mark.parametrize(
    "data,expected",
    [
        ("uniform", [1 / 3] * 3),
        ([0.5, 0.25, 0.25], [0.5, 0.25, 0.25]),
        (["1/2", "1/4", "1/4"], [0.5, 0.25, 0.25]),
        ({"weights": [0.0, 1.0, 0.0]}, [0.0, 1.0, 0.0]),
        ({"exact": ["1/3", "1/3", "1/3"]}, [1 / 3] * 3),
    ],
)
def test_marginal_from_dict(data, expected):
    assert np.allclose(Marginal.from_dict(data, l=3).weights, expected)


@pytest.mark.parametrize("bad", ["nonsense", {"foo": 1}, ["a", "b"], [[1]]])
def test_marginal_from_dict_rejects(bad):
    with pytest.raises(ValidationError):
        Marginal.from_dict(bad, l=2)


def test_marginal_dict_roundtrip():
    m = Marginal.from_fractions(["1/6", "1/3", "1/2"])
    back = Marginal.from_dict(m.to_dict())
    assert back.as_fractions() == m.as_fractions()


def test_quantized_measure():
    q = QuantizedMeasure(3, (2, 1, 0))
    assert q.multi_index == (0, 0, 1)
    assert np.allclose(q.lam, [2 / 3, 1 / 3, 0])
    assert q.marginal.as_fractions() == (Fraction(2, 3), Fraction(1, 3), Fraction(0))
    assert QuantizedMeasure.from_multi_index((1, 0, 0), 3) == q
    with pytest.raises(ValidationError):
        QuantizedMeasure(3, (2, 2, 0))
    with pytest.raises(ValidationError):
        QuantizedMeasure(3, (4, -1, 0))


@pytest.mark.parametrize(
    "l,N,expected",
    [
        (1, 5, [(5,)]),
        (2, 3, [(3, 0), (2, 1), (1, 2), (0, 3)]),
    ],
)
def test_enumerate_small(l, N, expected):
    assert [q.rho for q in enumerate_quantized(l, N)] == expected


def test_enumerate_fig2_count():
    assert len(enumerate_quantized(3, 10)) == 66


@pytest.mark.parametrize("l", range(1, 7))
@pytest.mark.parametrize("N", range(1, 13))
def test_enumerate_counts_and_order(l, N):
    rhos = [q.rho for q in enumerate_quantized(l, N)]
    assert len(rhos) == math.comb(N + l - 1, l - 1) == count_quantized(l, N)
    assert rhos == sorted(set(rhos), reverse=True)
    assert all(sum(r) == N for r in rhos)
    assert np.array_equal(occupation_array(l, N), np.array(rhos))


def test_enumerate_capacity():
    with pytest.raises(CapacityError):
        enumerate_quantized(10, 30, limit=1000)
    with pytest.raises(CapacityError):
        occupation_array(40, 40)


@pytest.mark.parametrize(
    "weights,expected",
    [
        ({(1, 0, 0): 1.0}, {(0, 0, 1): 1.0}),
        ({(0, 1): 0.5, (1, 0): 0.5}, {(0, 1): 1.0}),
        (EXAMPLE1_PLAN, EXAMPLE1_PLAN),
    ],
)
def test_symmetrize_examples(weights, expected):
    assert symmetrize(weights).entries == expected


def test_symmetrize_rejects():
    with pytest.raises(ValidationError):
        symmetrize({(0, 1): -0.5, (1, 0): 1.5})
    with pytest.raises(ValidationError):
        symmetrize({(0, 1): 0.5})
    with pytest.raises(ValidationError):
        symmetrize({(0, 1): 0.5, (0, 1, 1): 0.5})


tuples = st.integers(1, 4).flatmap(
    lambda N: st.dictionaries(
        st.tuples(*[st.integers(0, 3)] * N), st.floats(0.01, 1.0), min_size=1, max_size=8
    )
)


@settings(max_examples=60, deadline=None)
@given(tuples)
def test_symmetrize_idempotent(raw):
    total = sum(raw.values())
    w = {k: v / total for k, v in raw.items()}
    p = symmetrize(w, 4)
    assert symmetrize(p.entries, 4).isclose(p, 1e-15)
    assert all(list(k) == sorted(k) for k in p.entries)
    assert math.isclose(sum(p.entries.values()), 1.0, abs_tol=1e-12)


def test_plan_validation_and_dust():
    with pytest.raises(ValidationError):
        SymmetricPlan(2, 2, {(1, 0): 1.0})
    with pytest.raises(ValidationError):
        SymmetricPlan(2, 2, {(0, 1): 0.9})
    p = SymmetricPlan(2, 2, {(0, 1): 1.0 - 1e-15, (0, 0): 1e-15})
    assert set(p.entries) == {(0, 1)}
    q = SymmetricPlan(2, 2, {(0, 1): 0.5, (0, 0): 0.25}, renormalize=True)
    assert math.isclose(q.entries[(0, 1)], 2 / 3)


def test_plan_json_roundtrip():
    p = SymmetricPlan(3, 3, EXAMPLE1_PLAN)
    d = p.to_dict()
    assert d == {"N": 3, "l": 3, "entries": [{"idx": [0, 0, 1], "w": 0.5}, {"idx": [1, 2, 2], "w": 0.5}]}
    assert SymmetricPlan.from_dict(d) == p


def test_marginal_k_examples():
    p = SymmetricPlan.dirac((0, 0, 1), 3)
    assert np.allclose(marginal_k(p, 1).weights, [2 / 3, 1 / 3, 0])
    assert np.allclose(marginal_k(p, 2).matrix, [[1 / 3, 1 / 3, 0], [1 / 3, 0, 0], [0, 0, 0]])
    ex1 = SymmetricPlan(3, 3, EXAMPLE1_PLAN)
    assert np.allclose(marginal_k(ex1, 1).weights, [1 / 3] * 3)
    assert marginal_k(ex1, 3) == ex1
    with pytest.raises(ValidationError):
        marginal_k(ex1, 0)
    with pytest.raises(ValidationError):
        marginal_k(ex1, 4)


def test_marginal_k_three_of_four():
    # the 3-point marginal of S delta_{0,0,1,2} drops one of the four particles uniformly
    m3 = marginal_k(SymmetricPlan.dirac((0, 0, 1, 2), 3), 3)
    assert m3.isclose(SymmetricPlan(3, 3, {(0, 1, 2): 0.5, (0, 0, 2): 0.25, (0, 0, 1): 0.25}))


def _random_plan(rng, l, N, atoms=4):
    acc = {}
    for k, v in zip([tuple(rng.integers(0, l, N).tolist()) for _ in range(atoms)], rng.random(atoms)):
        acc[k] = acc.get(k, 0.0) + v
    total = sum(acc.values())
    return symmetrize({k: v / total for k, v in acc.items()}, l)


@pytest.mark.parametrize("seed", range(20))
def test_marginal_consistency(seed):
    rng = np.random.default_rng(seed)
    l, N = int(rng.integers(1, 5)), int(rng.integers(2, 6))
    plan = _random_plan(rng, l, N)
    m1, m2 = marginal_k(plan, 1), marginal_k(plan, 2)
    assert math.isclose(m2.matrix.sum(), 1.0, abs_tol=1e-12) and m2.matrix.min() >= 0
    assert np.allclose(m2.matrix.sum(axis=1), m1.weights, atol=1e-12)
    for k in range(3, N + 1):
        mk = marginal_k(plan, k)
        assert math.isclose(sum(mk.entries.values()), 1.0, abs_tol=1e-12)
        assert np.allclose(marginal_k(mk, 1).weights, m1.weights, atol=1e-12)
        assert np.allclose(marginal_k(mk, 2).matrix, m2.matrix, atol=1e-12)


@pytest.mark.parametrize("l", [1, 2, 3, 4])
@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_dirac_marginal_is_occupation(l, N):
    for q in enumerate_quantized(l, N):
        m = marginal_k(SymmetricPlan.dirac(q.multi_index, l), 1)
        assert m.as_fractions() == tuple(Fraction(r, N) for r in q.rho)


def test_pair_measure():
    with pytest.raises(ValidationError):
        PairMeasure([[0.5, 0.2], [0.3, 0.0]])
    with pytest.raises(ValidationError):
        PairMeasure([[0.5, 0.25], [0.25, 0.1]])
    with pytest.raises(ValidationError):
        PairMeasure([[1.2, -0.1], [-0.1, 0.0]])
    mu = PairMeasure([[0.0, 0.5], [0.5, 0.0]])
    assert np.array_equal(mu.matrix, mu.matrix.T)
    assert np.allclose(mu.marginal().weights, [0.5, 0.5])
    assert np.array_equal(PairMeasure.from_dict(mu.to_dict()).matrix, mu.matrix)
    with pytest.raises(ValidationError):
        PairMeasure.from_dict({"rows": []})


def test_sae_state():
    q1, q2 = QuantizedMeasure(3, (2, 1, 0)), QuantizedMeasure(3, (0, 1, 2))
    s = SAEState(3, 3, ((0.5, q1), (0.5, q2))).with_canonical_maps()
    assert s.maps.tolist() == [[0, 1], [0, 2], [1, 2]]
    assert s.plan() == SymmetricPlan(3, 3, EXAMPLE1_PLAN)
    assert s.marginal().is_uniform()
    assert SAEState.from_dict(s.to_dict()).plan() == s.plan()
    exact = SAEState(3, 3, ((Fraction(1, 2), q1), (Fraction(1, 2), q2)))
    assert exact.is_exact and exact.marginal().as_fractions() == (Fraction(1, 3),) * 3
    assert SAEState.from_dict(exact.to_dict()).support[0][0] == Fraction(1, 2)
    with pytest.raises(ValidationError):
        SAEState(3, 3, ((0.4, q1), (0.5, q2)))
    with pytest.raises(ValidationError):
        SAEState(3, 2, ((1.0, QuantizedMeasure(3, (2, 1))),), maps=[[0], [1], [1]])
    with pytest.raises(ValidationError):
        SAEState(3, 1, ((0.5, QuantizedMeasure(3, (3,))), (0.5, QuantizedMeasure(3, (3,)))))


def test_any_map_filling_gives_same_plan():
    q1, q2 = QuantizedMeasure(3, (2, 1, 0)), QuantizedMeasure(3, (0, 1, 2))
    canon = SAEState(3, 3, ((0.5, q1), (0.5, q2))).with_canonical_maps()
    other = SAEState(3, 3, ((0.5, q1), (0.5, q2)), maps=[[1, 2], [0, 1], [0, 2]])
    assert plan_from_maps(other.alphas, other.maps, 3) == plan_from_maps(canon.alphas, canon.maps, 3) == canon.plan()
