import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from submax import polytopes
from submax.polytopes import (
    Box,
    Cardinality,
    GraphicMatroid,
    Knapsack,
    Matroid,
    PartitionMatroid,
    is_normalized,
    lift,
    normalize_ground_set,
)
from submax.setfn import SizeError, bits_matrix

from .helpers import random_cut, triangle


def brute_linear_max(P, w):
    """max w.v over every vertex, independent of the greedy oracles."""
    return max(float(w @ v) for v in P.enumerate_vertices())


def _random_matroids(n, rng):
    owner = rng.integers(3, size=n)
    blocks = [list(np.flatnonzero(owner == b)) for b in range(3)]
    caps = list(rng.integers(1, 3, size=3))
    # a small multigraph so the graphic matroid has n edges
    edges = [tuple(rng.choice(5, 2, replace=False)) for _ in range(n)]
    return [Box(n), Cardinality(n, int(rng.integers(1, n))), PartitionMatroid(n, blocks, caps),
            GraphicMatroid(edges), Matroid(n, lambda S: np.count_nonzero(S) <= 2)]


def test_contains_examples():
    P = Cardinality(3, 2)
    assert P.contains([1, 1, 0])
    assert not P.contains([1, 1, 0.5])
    assert Knapsack([2, 3], 4).contains([1, 0.6])
    assert not Knapsack([2, 3], 4).contains([1, 0.7])


def test_contains_box_bounds():
    assert not Box(2).contains([1.1, 0])
    assert not Cardinality(2, 2).contains([-0.1, 0])
    assert Box(2).contains([1 + 1e-10, 0])


def test_maximize_examples():
    x = Cardinality(3, 1).maximize_linear(np.array([3.0, -1.0, 2.0]))
    assert x.tolist() == [1, 0, 0]
    assert not Cardinality(3, 2).maximize_linear(-np.ones(3)).any()
    P = PartitionMatroid(3, [[0, 1], [2]], [1, 1])
    x = P.maximize_linear(np.array([1.0, 2.0, 1.0]))
    assert x.tolist() == [0, 1, 1]
    assert brute_linear_max(P, np.array([1.0, 2.0, 1.0])) == 3.0


def test_ties_go_to_lowest_id():
    assert Cardinality(4, 2).maximize_linear(np.ones(4)).tolist() == [1, 1, 0, 0]
    assert Knapsack([1, 1, 1], 1.5).maximize_linear(np.ones(3)).tolist() == [1, 0.5, 0]


def test_knapsack_fractional_greedy():
    P = Knapsack([2, 3, 0], 4)
    x = P.maximize_linear(np.array([1.0, 3.0, 0.5]))
    # free item first, then by density 1.0 then 0.5
    assert x.tolist() == [0.5, 1.0, 1.0]


@pytest.mark.parametrize("seed", range(6))
def test_matroid_oracle_optimal(seed):
    rng = np.random.default_rng(seed)
    n = 8
    for P in _random_matroids(n, rng):
        for _ in range(10):
            w = rng.normal(size=n)
            x = P.maximize_linear(w)
            assert P.contains(x)
            assert w @ x == pytest.approx(brute_linear_max(P, w), abs=1e-12)
            assert np.all(x[w < 0] == 0)


@pytest.mark.parametrize("seed", range(6))
def test_knapsack_oracle_optimal(seed):
    rng = np.random.default_rng(seed)
    P = Knapsack(rng.uniform(0.1, 1, 7), 1.5)
    for _ in range(10):
        w = rng.normal(size=7)
        x = P.maximize_linear(w)
        assert P.contains(x)
        assert w @ x == pytest.approx(brute_linear_max(P, w), abs=1e-9)
        assert np.all(x[w < 0] == 0)


def test_enumerate_vertices_examples():
    got = sorted(map(tuple, Cardinality(2, 1).enumerate_vertices()))
    assert got == [(0, 0), (0, 1), (1, 0)]
    assert len(Box(2).enumerate_vertices()) == 4
    assert len(PartitionMatroid(3, [[0, 1], [2]], [1, 1]).enumerate_vertices()) == 6


def test_enumerate_vertices_size_limit():
    with pytest.raises(SizeError):
        Cardinality(17, 2).enumerate_vertices()


def test_knapsack_vertices_feasible():
    P = Knapsack([0.5, 0.7, 0.9], 1.0)
    V = P.enumerate_vertices()
    assert all(P.contains(v) for v in V)
    assert any(np.any((v > 0) & (v < 1)) for v in V)


@pytest.mark.parametrize("seed", range(4))
def test_down_closed(seed):
    rng = np.random.default_rng(seed)
    n = 6
    cands = _random_matroids(n, rng) + [Knapsack(rng.uniform(0.1, 1, n), 1.2)]
    for P in cands:
        for _ in range(250):
            x = P.maximize_linear(rng.normal(size=n)) * rng.random(n)
            assert P.contains(x)
            assert P.contains(x * rng.random(n))


@given(arrays(np.float64, 5, elements=st.floats(0, 1)))
def test_matroid_polytope_membership_matches_rank(x):
    # generic rank-based membership agrees with the closed form for uniform matroids
    generic = Matroid(5, lambda S: np.count_nonzero(S) <= 2)
    assert generic.contains(x) == Cardinality(5, 2).contains(x)


def test_rank_table_uniform():
    r = Matroid(4, lambda S: np.count_nonzero(S) <= 2).rank_table()
    counts = bits_matrix(np.arange(16), 4).sum(axis=1)
    assert np.array_equal(r, np.minimum(counts, 2))


def test_graphic_matroid_cycle_dependent():
    P = GraphicMatroid([(0, 1), (1, 2), (0, 2)])
    assert not P.is_independent([True, True, True])
    assert P.is_independent([True, True, False])


def test_partition_blocks_validated():
    with pytest.raises(ValueError):
        PartitionMatroid(3, [[0, 1], [1]], [1, 1])
    with pytest.raises(ValueError):
        PartitionMatroid(3, [[0]], [1, 2])


def test_normalize_knapsack():
    f = random_cut(2, 0, density=1.0)
    g, P, kept, removed = normalize_ground_set(f, Knapsack([5, 1], 4))
    assert removed.tolist() == [0] and kept.tolist() == [1]
    assert g.n == 1 and is_normalized(P)
    assert g.evaluate([True]) == f.evaluate([False, True])


def test_normalize_cardinality_noop():
    f = triangle()
    P = Cardinality(3, 1)
    g, Q, kept, removed = normalize_ground_set(f, P)
    assert g is f and Q is P and len(removed) == 0


def test_normalize_removes_loop():
    f = triangle()
    P = Matroid(3, lambda S: not S[1])
    g, Q, kept, removed = normalize_ground_set(f, P)
    assert removed.tolist() == [1]
    assert Q.is_independent([True, True])


def test_normalize_graphic_loop():
    P = GraphicMatroid([(0, 1), (2, 2), (1, 2)])
    _, Q, kept, removed = normalize_ground_set(triangle(), P)
    assert removed.tolist() == [1] and Q.edges == [(0, 1), (1, 2)]


def test_normalize_idempotent():
    f = random_cut(5, 3)
    P = Knapsack([0.5, 3.0, 1.0, 2.5, 0.2], 2.0)
    g1, P1, k1, _ = normalize_ground_set(f, P)
    g2, P2, k2, r2 = normalize_ground_set(g1, P1)
    assert len(r2) == 0 and g2 is g1 and P2 is P1


def test_normalize_everything_removed():
    with pytest.raises(ValueError):
        normalize_ground_set(triangle(), Knapsack([2, 2, 2], 1))


def test_lift():
    assert lift(np.array([0.5, 0.25]), [1, 3], 4).tolist() == [0, 0.5, 0, 0.25]


@pytest.mark.parametrize("P", [
    Box(3), Cardinality(3, 2), PartitionMatroid(3, [[0, 2]], [1]),
    GraphicMatroid([(0, 1), (1, 2), (0, 2)]), Knapsack([0.2, 0.5, 1.0], 0.9),
], ids=lambda P: P.kind)
def test_constraint_round_trip(P):
    Q = polytopes.from_dict(json.loads(json.dumps(P.to_dict())), P.n)
    assert np.array_equal(Q.feasible_table(), P.feasible_table())


def test_callback_matroid_not_serializable():
    with pytest.raises(TypeError):
        Matroid(2, lambda S: True).to_dict()


def test_feasible_sets_vectorized_matches_contains():
    rng = np.random.default_rng(0)
    P = Knapsack(rng.uniform(0.1, 1, 6), 1.3)
    X = bits_matrix(np.arange(64), 6)
    assert np.array_equal(P.feasible_sets(X), [P.contains(r.astype(float)) for r in X])
