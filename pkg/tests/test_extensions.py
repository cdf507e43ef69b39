import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from submax._rng import substream
from submax.extensions import (
    Multilinear,
    estimate_gradient,
    estimate_multilinear,
    estimate_weight,
    estimate_weights,
    exact_gradient,
    exact_multilinear,
    indicator,
    join,
    lovasz_value,
    meet,
    partial_derivative_exact,
    product_measure,
    product_measure_many,
    sample_random_subset,
    sample_random_subsets,
)
from submax.setfn import GraphCut, SizeError, TableFunction

from .helpers import brute_multilinear, edge, random_coverage, random_cut

points6 = arrays(np.float64, 6, elements=st.floats(0, 1))


def exact_marginal_moments(f, x, u):
    """Mean and variance of f(u | R(x)) (zero when u is drawn) by enumeration."""
    n = f.n
    m1 = m2 = 0.0
    for bits in itertools.product([False, True], repeat=n):
        S = np.array(bits)
        prob = np.prod(np.where(S, x, 1.0 - x))
        m = f.marginal(u, S)
        m1 += prob * m
        m2 += prob * m * m
    return m1, m2 - m1 * m1


def test_product_measure_sums_to_one():
    x = np.array([0.2, 0.7, 0.5])
    p = product_measure(x)
    assert p.sum() == pytest.approx(1.0)
    # bitmask 0b011 = {0, 1}
    assert p[3] == pytest.approx(0.2 * 0.7 * 0.5)
    assert np.allclose(product_measure_many(np.stack([x, 1 - x]))[0], p)


def test_edge_multilinear_half():
    assert exact_multilinear(edge(), [0.5, 0.5]) == pytest.approx(0.5)


def test_multilinear_at_vertices_and_zero():
    f = random_coverage(5, 0)
    for bits in range(32):
        S = (bits >> np.arange(5)) & 1 == 1
        assert exact_multilinear(f, S.astype(float)) == pytest.approx(f.evaluate(S), abs=1e-12)
    assert exact_multilinear(f, np.zeros(5)) == f.evaluate(np.zeros(5, dtype=bool))


@given(points6, st.integers(0, 50))
def test_multilinear_matches_brute_sum(x, seed):
    f = random_cut(6, seed)
    assert Multilinear(f).value(x) == pytest.approx(brute_multilinear(f, x), abs=1e-9)


def test_values_batch_matches_single():
    f = random_cut(7, 5)
    ml = Multilinear(f)
    X = np.random.default_rng(0).random((20, 7))
    assert np.allclose(ml.values(X, chunk=3), [ml.value(x) for x in X], atol=1e-12)


def test_large_n_uses_reshape_path():
    # n = 17 goes through the non-precomputed branch
    f = random_cut(17, 1, density=0.2)
    ml = Multilinear(f)
    x = np.random.default_rng(2).random(17)
    g = ml.gradient(x)
    for u in (0, 8, 16):
        hi, lo = x.copy(), x.copy()
        hi[u], lo[u] = 1.0, 0.0
        assert g[u] == pytest.approx(ml.value(hi) - ml.value(lo), abs=1e-9)
    w = ml.weights(x)
    assert np.allclose(w, (1 - x) * g, atol=1e-9)


def test_exact_size_limit():
    with pytest.raises(SizeError):
        exact_multilinear(GraphCut(26, []), np.zeros(26))


def test_point_validation():
    with pytest.raises(ValueError):
        exact_multilinear(edge(), [0.5, 1.5])
    with pytest.raises(ValueError):
        exact_multilinear(edge(), [0.5])


def test_partial_derivative_edge():
    # F = x_a + x_b - 2 x_a x_b
    assert partial_derivative_exact(edge(), [0.3, 0.5], 0) == pytest.approx(0.0, abs=1e-12)
    assert partial_derivative_exact(edge(), [0.3, 0.1], 0) == pytest.approx(0.8)


@given(points6, st.integers(0, 50))
def test_observation_identity(x, seed):
    f = random_coverage(6, seed)
    ml = Multilinear(f)
    g = exact_gradient(f, x)
    Fx = ml.value(x)
    for u in range(6):
        up = x.copy()
        up[u] = 1.0
        assert (1 - x[u]) * g[u] == pytest.approx(ml.value(up) - Fx, abs=1e-9)
    assert np.allclose(ml.weights(x), (1 - x) * g, atol=1e-9)


@given(points6, st.integers(0, 5), st.floats(0, 1), st.integers(0, 50))
def test_multilinear_affine_per_coordinate(x, u, t, seed):
    ml = Multilinear(random_cut(6, seed))
    lo, hi, mid = x.copy(), x.copy(), x.copy()
    lo[u], hi[u], mid[u] = 0.0, 1.0, t
    assert ml.value(mid) == pytest.approx((1 - t) * ml.value(lo) + t * ml.value(hi), abs=1e-9)


def test_monotone_coverage_has_nonnegative_gradient():
    f = random_coverage(7, 3)
    rng = np.random.default_rng(1)
    for _ in range(20):
        assert exact_gradient(f, rng.random(7)).min() >= -1e-12


def test_lovasz_examples():
    assert lovasz_value(edge(), [0.5, 0.5]) == 0.0
    f = random_coverage(5, 1)
    S = np.array([True, False, True, True, False])
    assert lovasz_value(f, S.astype(float)) == pytest.approx(f.evaluate(S))
    assert lovasz_value(f, np.zeros(5)) == f.evaluate(np.zeros(5, dtype=bool))


def test_lovasz_uses_upper_threshold_sets():
    # f counts only element 0; f_hat(x) = x_0 with {u : x_u >= lam}
    f = TableFunction([0.0, 1.0, 0.0, 1.0])
    assert lovasz_value(f, [0.8, 0.1]) == pytest.approx(0.8)


@given(points6, st.integers(0, 50))
def test_multilinear_dominates_lovasz(x, seed):
    f = random_cut(6, seed)
    assert exact_multilinear(f, x) >= lovasz_value(f, x) - 1e-9


def test_sampler_degenerate_points():
    rng = substream(0, "t")
    S = np.array([True, False, True, False])
    for _ in range(50):
        assert np.array_equal(sample_random_subset(S.astype(float), rng), S)
        assert not sample_random_subset(np.zeros(4), rng).any()


def test_sampler_frequency_band():
    R = sample_random_subsets(np.full(6, 0.3), 100_000, substream(5, "freq"))
    freq = R.mean(axis=0)
    assert np.all(np.abs(freq - 0.3) <= 0.015)


def test_estimate_point_mass_exact():
    f = random_cut(6, 2)
    S = np.array([1, 0, 1, 1, 0, 0], dtype=float)
    est = estimate_multilinear(f, S, 50, seed=3)
    assert est.mean == f.evaluate(S.astype(bool)) and est.std_error == 0.0


def test_estimate_two_samples_nondegenerate():
    f = random_cut(8, 0, density=1.0)
    est = estimate_multilinear(f, np.full(8, 0.5), 2, seed=1)
    assert est.std_error > 0 and est.sample_count == 2


def test_estimate_rejects_single_sample():
    with pytest.raises(ValueError):
        estimate_multilinear(edge(), [0.5, 0.5], 1, seed=0)


def test_estimate_std_error_definition():
    f = random_cut(5, 3)
    x = np.full(5, 0.4)
    est = estimate_multilinear(f, x, 300, seed=9)
    vals = f.evaluate_many(sample_random_subsets(x, 300, substream(9, "multilinear", 0)))
    assert est.mean == pytest.approx(vals.mean(), abs=1e-12)
    assert est.std_error == pytest.approx(vals.std(ddof=1) / np.sqrt(300))


def test_estimate_independent_of_workers():
    f = random_cut(10, 4)
    x = np.random.default_rng(0).random(10)
    a = estimate_multilinear(f, x, 20_000, seed=11, workers=1)
    b = estimate_multilinear(f, x, 20_000, seed=11, workers=4)
    assert a == b


def test_estimate_calibration_small():
    f = random_cut(10, 6)
    x = np.random.default_rng(3).random(10)
    exact = exact_multilinear(f, x)
    hits = sum(abs(e.mean - exact) <= 4 * e.std_error
               for e in (estimate_multilinear(f, x, 5000, seed=s) for s in range(200)))
    assert hits >= 198


def test_estimate_grand_mean_unbiased():
    f = random_coverage(8, 2)
    x = np.random.default_rng(4).random(8)
    ests = [estimate_multilinear(f, x, 200, seed=s) for s in range(1000)]
    grand = np.mean([e.mean for e in ests])
    pooled = np.sqrt(np.mean([e.std_error ** 2 for e in ests]) / len(ests))
    assert abs(grand - exact_multilinear(f, x)) <= 4 * pooled


def test_weight_at_zero_is_singleton_gain():
    f = random_coverage(6, 1)
    empty = np.zeros(6, dtype=bool)
    for u in range(6):
        S = empty.copy()
        S[u] = True
        assert estimate_weight(f, np.zeros(6), u, 5, seed=0) == f.evaluate(S) - f.evaluate(empty)


def test_weight_deterministic_point():
    assert estimate_weight(edge(), [0.0, 1.0], 0, 7, seed=2) == -1.0


def test_weight_within_four_exact_standard_errors():
    f = random_cut(8, 12)
    x = np.random.default_rng(8).random(8)
    r = 10_000
    for u in range(8):
        mean, var = exact_marginal_moments(f, x, u)
        est = estimate_weight(f, x, u, r, seed=21)
        assert abs(est - mean) <= 4 * np.sqrt(var / r) + 1e-12


def test_shared_weights_match_exact():
    f = random_coverage(7, 5)
    x = np.random.default_rng(1).random(7)
    means, se = estimate_weights(f, x, 20_000, seed=3)
    exact = Multilinear(f).weights(x)
    assert np.all(np.abs(means - exact) <= 4 * se + 1e-12)


def test_sampled_gradient_matches_exact():
    f = random_cut(7, 2)
    x = np.random.default_rng(5).random(7)
    means, se = estimate_gradient(f, x, 20_000, seed=4)
    assert np.all(np.abs(means - exact_gradient(f, x)) <= 4 * se + 1e-12)


def test_lattice_helpers():
    x, y = np.array([0.2, 0.9]), np.array([0.5, 0.1])
    assert np.array_equal(join(x, y), [0.5, 0.9])
    assert np.array_equal(meet(x, y), [0.2, 0.1])
    assert np.array_equal(indicator(3, [True, False, True]), [1.0, 0.0, 1.0])
