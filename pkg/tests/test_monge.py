from fractions import Fraction

import numpy as np
import pytest

from mmot.errors import NotMongeError, ValidationError
from mmot.measures import QuantizedMeasure, SAEState, SymmetricPlan
from mmot.monge import (
    MongeState,
    QuantizedDoublyStochastic,
    birkhoff_quantized_decompose,
    count_monge_candidates,
    monge_to_sae,
    neighborhood,
    perfect_matching,
    sae_to_monge,
)


def perm_matrix_counts(perms, l):
    P = np.zeros((l, l), dtype=np.int64)
    for tau in perms:
        P[list(tau), list(range(l))] += 1
    return P


def test_matching_examples():
    assert perfect_matching(np.eye(3, dtype=bool)).permutation() == (0, 1, 2)
    assert perfect_matching(np.ones((3, 3), dtype=bool)).permutation() == (0, 1, 2)
    adj = np.array([[1, 0], [1, 0]], dtype=bool)
    res = perfect_matching(adj)
    assert res.verdict == "deficient" and res.witness == [0, 1]
    assert len(neighborhood(adj, res.witness)) < len(res.witness)
    with pytest.raises(ValidationError):
        perfect_matching(np.ones((2, 3), dtype=bool))


@pytest.mark.parametrize("seed", range(30))
def test_matching_random_against_hall(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    adj = rng.random((n, n)) < 0.4
    res = perfect_matching(adj)
    if res.matched:
        perm = res.permutation()
        assert sorted(perm) == list(range(n))
        assert all(adj[i, perm[i]] for i in range(n))
    else:
        assert len(neighborhood(adj, res.witness)) < len(res.witness)
    # brute-force existence oracle
    from itertools import permutations

    exists = any(all(adj[i, p[i]] for i in range(n)) for p in permutations(range(n)))
    assert exists == res.matched


def test_quantized_doubly_stochastic_validation():
    with pytest.raises(ValidationError):
        QuantizedDoublyStochastic(np.array([[1, 0], [0, 2]]), 2)
    with pytest.raises(ValidationError):
        QuantizedDoublyStochastic(np.array([[0.5, 0.5], [0.5, 0.5]]), 1)
    with pytest.raises(ValidationError):
        QuantizedDoublyStochastic.from_matrix([[0.4, 0.6], [0.6, 0.4]], 2)
    A = QuantizedDoublyStochastic.from_matrix([[Fraction(2, 3), Fraction(1, 3)], [Fraction(1, 3), Fraction(2, 3)]], 3)
    assert A.counts.tolist() == [[2, 1], [1, 2]]
    assert np.allclose(A.matrix, [[2 / 3, 1 / 3], [1 / 3, 2 / 3]])


def test_birkhoff_examples():
    assert birkhoff_quantized_decompose(QuantizedDoublyStochastic(np.eye(3, dtype=np.int64) * 2, 2)) == [(0, 1, 2)] * 2
    perms = birkhoff_quantized_decompose(QuantizedDoublyStochastic.from_matrix([[0.5, 0.5], [0.5, 0.5]], 2))
    assert sorted(perms) == [(0, 1), (1, 0)]
    A = QuantizedDoublyStochastic.from_matrix(
        [[2 / 3, 1 / 3, 0], [1 / 3, 1 / 3, 1 / 3], [0, 1 / 3, 2 / 3]], 3
    )
    perms = birkhoff_quantized_decompose(A)
    assert len(perms) == 3
    assert np.array_equal(perm_matrix_counts(perms, 3), A.counts)


def random_monge(rng, l, N):
    return MongeState(tuple(tuple(rng.permutation(l).tolist()) for _ in range(N)))


@pytest.mark.parametrize("seed", range(40))
def test_birkhoff_random_exact(seed):
    rng = np.random.default_rng(seed)
    l, N = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    counts = perm_matrix_counts(random_monge(rng, l, N).perms, l)
    perms = birkhoff_quantized_decompose(QuantizedDoublyStochastic(counts, N))
    assert len(perms) == N
    assert np.array_equal(perm_matrix_counts(perms, l), counts)


def test_monge_to_sae_examples():
    s = monge_to_sae(MongeState(((0, 1, 2), (0, 1, 2))))
    assert [q.rho for _, q in s.support] == [(2, 0, 0), (0, 2, 0), (0, 0, 2)]
    assert all(a == Fraction(1, 3) for a, _ in s.support)
    s = monge_to_sae(MongeState(((0, 1), (1, 0))))
    assert [q.rho for _, q in s.support] == [(1, 1), (1, 1)]
    assert s.plan().entries == {(0, 1): 1.0}


def test_sae_to_monge_diracs_give_identity():
    for N in (1, 2, 4):
        s = SAEState(N, 3, tuple((Fraction(1, 3), QuantizedMeasure(N, tuple(N * (i == j) for i in range(3)))) for j in range(3)))
        assert sae_to_monge(s).perms == ((0, 1, 2),) * N


@pytest.mark.parametrize("seed", range(100))
def test_roundtrip(seed):
    rng = np.random.default_rng(1000 + seed)
    l, N = int(rng.integers(1, 6)), int(rng.integers(1, 6))
    m = random_monge(rng, l, N)
    s = monge_to_sae(m)
    assert s.marginal().is_uniform()
    back = sae_to_monge(s)
    assert back.plan() == m.plan()


def test_rejections():
    ex1 = SAEState(3, 3, ((0.5, QuantizedMeasure(3, (2, 1, 0))), (0.5, QuantizedMeasure(3, (0, 1, 2)))))
    with pytest.raises(NotMongeError):
        sae_to_monge(ex1)
    uneven = SAEState(2, 2, ((0.6, QuantizedMeasure(2, (1, 1))), (0.4, QuantizedMeasure(2, (1, 1)))))
    with pytest.raises(NotMongeError):
        sae_to_monge(uneven)
    near = SAEState(2, 2, ((0.5 + 1e-9, QuantizedMeasure(2, (2, 0))), (0.5 - 1e-9, QuantizedMeasure(2, (0, 2)))))
    with pytest.raises(NotMongeError):
        sae_to_monge(near)
    skewed = SAEState(2, 2, ((0.5, QuantizedMeasure(2, (2, 0))), (0.5, QuantizedMeasure(2, (1, 1)))))
    with pytest.raises(NotMongeError):
        sae_to_monge(skewed)


def test_monge_state_validation_and_serialization():
    with pytest.raises(ValidationError):
        MongeState(((0, 0),))
    with pytest.raises(ValidationError):
        MongeState(())
    m = MongeState(((0, 1, 2), (2, 0, 1)))
    assert MongeState.from_list(m.to_list()) == m
    assert MongeState.from_list({"maps": m.to_list()}) == m
    with pytest.raises(ValidationError):
        MongeState.from_list("nope")
    assert m.plan() == SymmetricPlan(2, 3, {(0, 2): 1 / 3, (0, 1): 1 / 3, (1, 2): 1 / 3})
    assert count_monge_candidates(3, 3) == 36
