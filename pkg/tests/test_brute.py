import itertools

import numpy as np
import pytest

from submax.brute import brute_force_opt
from submax.polytopes import Cardinality, Knapsack, PartitionMatroid
from submax.setfn import Coverage, GraphCut, SizeError, TableFunction

from .helpers import random_coverage, random_cut, triangle


def test_triangle_tie_break():
    S, v = brute_force_opt(triangle(), Cardinality(3, 1))
    assert v == 2.0 and S.tolist() == [True, False, False]


def test_zero_function():
    S, v = brute_force_opt(TableFunction(np.zeros(8)), Cardinality(3, 2))
    assert v == 0.0 and not S.any()


def test_monotone_full_set():
    # every element owns a private item, so the full set is the unique maximizer
    f = Coverage([[u, 6 + u % 3] for u in range(6)], np.linspace(0.5, 1.0, 9))
    S, v = brute_force_opt(f, Cardinality(6, 6))
    assert S.all() and v == f.evaluate(np.ones(6, dtype=bool))
    g = random_coverage(6, 0)
    assert brute_force_opt(g, Cardinality(6, 6))[1] == g.evaluate(np.ones(6, dtype=bool))


@pytest.mark.parametrize("seed", range(5))
def test_matches_python_loop(seed):
    f = random_cut(7, seed)
    P = Knapsack(np.random.default_rng(seed).uniform(0.2, 1, 7), 1.5) if seed % 2 else \
        PartitionMatroid(7, [[0, 1, 2], [3, 4, 5, 6]], [1, 2])
    best_v = -np.inf
    for bits in itertools.product([False, True], repeat=7):
        S = np.array(bits[::-1])
        if P.contains(S.astype(float)):
            best_v = max(best_v, f.evaluate(S))
    S, v = brute_force_opt(f, P)
    assert v == best_v and P.contains(S.astype(float))


def test_size_limit():
    with pytest.raises(SizeError):
        brute_force_opt(GraphCut(21, []), Cardinality(21, 2))
