import itertools

import numpy as np

from submax.setfn import Coverage, GraphCut


def edge():
    """One edge a-b of weight 1."""
    return GraphCut(2, [(0, 1, 1.0)])


def triangle():
    return GraphCut(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def brute_multilinear(f, x):
    """Direct sum over subsets; deliberately independent of the tabulated code path."""
    n = f.n
    total = 0.0
    for bits in itertools.product([False, True], repeat=n):
        S = np.array(bits)
        prob = np.prod(np.where(S, x, 1.0 - x))
        total += prob * f.evaluate(S)
    return total


def random_cut(n, seed, density=0.6):
    rng = np.random.default_rng(seed)
    edges = [(i, j, float(rng.uniform(0.1, 1.0))) for i in range(n) for j in range(i + 1, n)
             if rng.random() < density]
    return GraphCut(n, edges)


def random_coverage(n, seed, universe=None):
    rng = np.random.default_rng(seed)
    m = universe or 2 * n
    sets = [list(np.flatnonzero(rng.random(m) < 0.3)) or [int(rng.integers(m))] for _ in range(n)]
    return Coverage(sets, rng.uniform(0.1, 1.0, m))
