"""Multilinear and Lovasz extensions, exact and sampled.

The exact routines enumerate the power set, so they are meant for small
ground sets (n <= 25).  :class:`Multilinear` tabulates f once and then
evaluates F, its gradient and the marginal weights F(x v 1_u) - F(x) at
any number of points for O(n 2^n) work each.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import substream
from .setfn import ENUM_MAX_N, SizeError, as_mask

SAMPLE_BLOCK = 4096
_PRECOMPUTE_MAX_N = 16


def as_point(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"point must have length {n}, got shape {x.shape}")
    if np.any(x < 0) or np.any(x > 1) or not np.all(np.isfinite(x)):
        raise ValueError("point coordinates must lie in [0, 1]")
    return x


def product_measure(x):
    """Probability of every subset under R(x), indexed by bitmask."""
    p = np.ones(1)
    for xu in x:
        p = np.concatenate((p * (1.0 - xu), p * xu))
    return p


def product_measure_many(X):
    """Row-wise product measures for a (k, n) array of points."""
    X = np.asarray(X, dtype=float)
    p = np.ones((X.shape[0], 1))
    for u in range(X.shape[1]):
        xu = X[:, u:u + 1]
        p = np.concatenate((p * (1.0 - xu), p * xu), axis=1)
    return p


class Multilinear:
    """Exact multilinear extension of a tabulated set function."""

    def __init__(self, f=None, *, table=None):
        if table is None:
            if f.n > ENUM_MAX_N:
                raise SizeError(f"exact multilinear extension needs n <= {ENUM_MAX_N} (got {f.n})")
            table = f.table()
        self.table = np.asarray(table, dtype=float)
        self.n = len(self.table).bit_length() - 1
        n = self.n
        if n <= _PRECOMPUTE_MAX_N:
            masks = np.arange(1 << n, dtype=np.int64)
            rows = []
            for u in range(n):
                rows.append(masks[(masks >> u) & 1 == 0])
            self._without = np.array(rows)
            self._with = self._without | (np.int64(1) << np.arange(n, dtype=np.int64))[:, None]
            self._diff = self.table[self._with] - self.table[self._without]
        else:
            self._without = None

    def _halves(self, arr, u):
        view = arr.reshape(-1, 2, 1 << u)
        return view[:, 0, :], view[:, 1, :]

    def value(self, x, p=None):
        if p is None:
            p = product_measure(x)
        return float(p @ self.table)

    def values(self, X, chunk=512):
        """F at every row of a (k, n) array."""
        X = np.asarray(X, dtype=float)
        out = np.empty(X.shape[0])
        for lo in range(0, X.shape[0], chunk):
            out[lo:lo + chunk] = product_measure_many(X[lo:lo + chunk]) @ self.table
        return out

    def weights(self, x, p=None):
        """w_u = F(x v 1_u) - F(x) = E[f(u | R(x))] for every u."""
        if p is None:
            p = product_measure(x)
        if self._without is not None:
            return (p[self._without] * self._diff).sum(axis=1)
        out = np.empty(self.n)
        for u in range(self.n):
            p0, _ = self._halves(p, u)
            f0, f1 = self._halves(self.table, u)
            out[u] = (p0 * (f1 - f0)).sum()
        return out

    def gradient(self, x, p=None):
        """dF/dx_u = F(x with x_u=1) - F(x with x_u=0) for every u."""
        if p is None:
            p = product_measure(x)
        if self._without is not None:
            return ((p[self._without] + p[self._with]) * self._diff).sum(axis=1)
        out = np.empty(self.n)
        for u in range(self.n):
            p0, p1 = self._halves(p, u)
            f0, f1 = self._halves(self.table, u)
            out[u] = ((p0 + p1) * (f1 - f0)).sum()
        return out


def exact_multilinear(f, x):
    """F(x) = sum_S f(S) prod_{u in S} x_u prod_{u not in S} (1 - x_u)."""
    x = as_point(x, f.n)
    return Multilinear(f).value(x)


def exact_gradient(f, x):
    x = as_point(x, f.n)
    return Multilinear(f).gradient(x)


def partial_derivative_exact(f, x, u):
    x = as_point(x, f.n)
    return float(Multilinear(f).gradient(x)[u])


def lovasz_value(f, x):
    """Lovasz extension, integrating f over the sets {u : x_u >= lam}."""
    x = as_point(x, f.n)
    levels = np.unique(np.concatenate(([0.0, 1.0], x)))
    X = x[None, :] >= levels[1:, None]
    vals = f.evaluate_many(X)
    return float(np.diff(levels) @ vals)


def sample_random_subset(x, rng):
    """One draw of R(x): element u included independently with probability x_u."""
    x = np.asarray(x, dtype=float)
    return rng.random(len(x)) < x


def sample_random_subsets(x, count, rng):
    x = np.asarray(x, dtype=float)
    return rng.random((count, len(x))) < x[None, :]


@dataclass(frozen=True)
class SampleEstimate:
    mean: float
    std_error: float
    sample_count: int
    seed: int


def _shifted_stats(vals, axis=-1):
    """Mean and standard error, computed relative to the first sample.

    The shift keeps constant samples exact (mean equals the value, error 0).
    """
    vals = np.asarray(vals, dtype=float)
    k = vals.shape[axis]
    shift = np.take(vals, [0], axis=axis)
    d = vals - shift
    mean = np.squeeze(shift, axis=axis) + d.mean(axis=axis)
    se = d.std(axis=axis, ddof=1) / np.sqrt(k) if k > 1 else np.full(mean.shape, np.inf)
    return mean, se


def _block_sizes(total):
    full, rest = divmod(total, SAMPLE_BLOCK)
    return [SAMPLE_BLOCK] * full + ([rest] if rest else [])


def estimate_multilinear(f, x, sample_count, seed, *, key=(), workers=1):
    """Monte-Carlo estimate of F(x).

    Samples are drawn in fixed-size blocks, each from its own keyed
    substream, so the result is the same for any ``workers``.
    """
    x = as_point(x, f.n)
    if sample_count < 2:
        raise ValueError("sample_count must be at least 2")

    def block(item):
        b, size = item
        rng = substream(seed, "multilinear", *key, b)
        return f.evaluate_many(sample_random_subsets(x, size, rng))

    items = list(enumerate(_block_sizes(sample_count)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, items))
    else:
        parts = [block(it) for it in items]
    mean, se = _shifted_stats(np.concatenate(parts))
    return SampleEstimate(float(mean), float(se), int(sample_count), int(seed))


def _marginal_samples(f, R, u):
    out = np.zeros(R.shape[0])
    absent = ~R[:, u]
    if absent.any():
        base = R[absent]
        plus = base.copy()
        plus[:, u] = True
        both = f.evaluate_many(np.concatenate((plus, base)))
        k = base.shape[0]
        out[absent] = both[:k] - both[k:]
    return out


def estimate_weight(f, x, u, r, seed, *, key=()):
    """Average of f(u | R(x)) over ``r`` draws (zero for draws containing u)."""
    x = as_point(x, f.n)
    if r < 1:
        raise ValueError("r must be positive")
    rng = substream(seed, "weight", *key, int(u))
    R = sample_random_subsets(x, r, rng)
    return float(_shifted_stats(_marginal_samples(f, R, int(u)))[0])


def estimate_weights(f, x, r, seed, *, key=()):
    """Estimates of E[f(u | R(x))] for all u from one shared batch of r draws.

    Returns ``(means, std_errors)``.
    """
    x = as_point(x, f.n)
    rng = substream(seed, "weights", *key)
    R = sample_random_subsets(x, r, rng)
    n = f.n
    base = f.evaluate_many(R)
    rows, owners = [], []
    for u in range(n):
        absent = np.flatnonzero(~R[:, u])
        plus = R[absent].copy()
        plus[:, u] = True
        rows.append(plus)
        owners.append(absent)
    plus_vals = f.evaluate_many(np.concatenate(rows)) if sum(len(o) for o in owners) else np.empty(0)
    marg = np.zeros((n, r))
    pos = 0
    for u, absent in enumerate(owners):
        k = len(absent)
        marg[u, absent] = plus_vals[pos:pos + k] - base[absent]
        pos += k
    return _shifted_stats(marg, axis=1)


def estimate_gradient(f, x, r, seed, *, key=()):
    """Sampled dF/dx_u = E[f(R + u) - f(R - u)], shared draws; returns (means, std_errors)."""
    x = as_point(x, f.n)
    rng = substream(seed, "gradient", *key)
    R = sample_random_subsets(x, r, rng)
    n = f.n
    plus = np.repeat(R[None, :, :], n, axis=0)
    minus = plus.copy()
    idx = np.arange(n)
    plus[idx, :, idx] = True
    minus[idx, :, idx] = False
    vals = f.evaluate_many(np.concatenate((plus.reshape(-1, n), minus.reshape(-1, n))))
    d = (vals[: n * r] - vals[n * r:]).reshape(n, r)
    return _shifted_stats(d, axis=1)


def join(x, y):
    return np.maximum(x, y)


def meet(x, y):
    return np.minimum(x, y)


def indicator(n, S):
    """1_S as a float point; ``S`` is a boolean mask."""
    return as_mask(S, n).astype(float)
