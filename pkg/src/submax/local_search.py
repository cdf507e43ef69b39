"""Fractional local search via Frank-Wolfe stationarity.

A point x in P with small stationarity gap

    max_{y in P} (y - x) . grad F(x)

satisfies 2F(x) >= F(x ^ y) + F(x v y) - gap for every y in P: F is concave
along non-negative and along non-positive directions, x v y - x and
x ^ y - x are such directions, and they sum to y - x.
"""
from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_seed
from .extensions import Multilinear, as_point, estimate_gradient, estimate_multilinear, product_measure
from .polytopes import TOL
from .setfn import ENUM_MAX_N, SizeError


@dataclass
class LocalSearchConfig:
    epsilon: float = 1e-3
    step: float = 0.05
    max_iterations: int = 10_000
    mode: str = "exact"
    samples: int = 1000
    # value scale for the stopping rule; None means n * max_u f({u})
    scale: float = None
    min_step: float = 1e-12

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.step <= 1:
            raise ValueError("step must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class LocalSearchResult:
    x: np.ndarray
    gap: float
    iterations: int
    value: float
    converged: bool
    scale: float
    history: list = field(default_factory=list, repr=False)


def surrogate_scale(f, table=None):
    """n * max_u f({u}); an upper bound on f(OPT) - f(empty) for normalized instances."""
    n = f.n
    if table is not None:
        singles = table[1 << np.arange(n)]
    else:
        singles = f.evaluate_many(np.eye(n, dtype=bool))
    scale = n * float(singles.max())
    return scale if scale > 0 else 1.0


def stationarity_gap(f, P, x, ml=None):
    """max over P of (y - x) . grad F(x), via one linear maximization."""
    if ml is None:
        if f.n > ENUM_MAX_N:
            raise SizeError(f"exact stationarity gap needs n <= {ENUM_MAX_N}")
        ml = Multilinear(f)
    x = as_point(x, f.n)
    g = ml.gradient(x)
    v = P.maximize_linear(g)
    return float((v - x) @ g)


def _move(x, v, step):
    return np.clip((1.0 - step) * x + step * v, 0.0, 1.0)


def fractional_local_search(f, P, cfg=None, seed=0, x0=None, record=False, ml=None):
    """Drive the Frank-Wolfe gap below ``epsilon * scale`` starting from ``x0`` (default 0).

    Exact mode uses a sufficient-increase backtracking rule: a move of size
    ``s`` is accepted if it gains at least ``s * gap / 2``, otherwise ``s``
    is halved.  The full move ``s = 1`` is always tried first.  After an accepted move the step is allowed to double again,
    never beyond ``cfg.step``.  Sampled mode takes fixed steps on an
    estimated gradient and inflates the stopping threshold by a
    3-standard-error radius.
    """
    cfg = cfg or LocalSearchConfig()
    n = f.n
    x = np.zeros(n) if x0 is None else as_point(x0, n).copy()
    if not P.contains(x):
        raise ValueError("starting point is not in P")
    if cfg.mode == "exact":
        return _exact_search(f, P, cfg, x, record, ml)
    return _sampled_search(f, P, cfg, x, seed, record)


def _exact_search(f, P, cfg, x, record, ml):
    if ml is None:
        ml = Multilinear(f)
    scale = cfg.scale if cfg.scale is not None else surrogate_scale(f, ml.table)
    target = cfg.epsilon * scale
    step = cfg.step
    history = []
    p = product_measure(x)
    value = ml.value(x, p)
    gap = np.inf
    it = 0
    converged = False
    while True:
        g = ml.gradient(x, p)
        v = P.maximize_linear(g)
        gap = float((v - x) @ g)
        if gap <= target:
            converged = True
            break
        if it >= cfg.max_iterations:
            break
        it += 1
        # a full jump to the vertex is tried first; it is accepted under the same rule
        cand = v.astype(float)
        p_cand = product_measure(cand)
        cand_value = ml.value(cand, p_cand)
        if cand_value - value >= 0.5 * gap:
            if record:
                history.append({"value": value, "gap": gap, "step": 1.0, "new_value": cand_value})
            x, p, value = cand, p_cand, cand_value
            continue
        while True:
            cand = _move(x, v, step)
            p_cand = product_measure(cand)
            cand_value = ml.value(cand, p_cand)
            if cand_value - value >= 0.5 * step * gap or step <= cfg.min_step:
                break
            step *= 0.5
        if record:
            history.append({"value": value, "gap": gap, "step": step, "new_value": cand_value})
        x, p, value = cand, p_cand, cand_value
        step = min(cfg.step, 2.0 * step)
    return LocalSearchResult(x, gap, it, value, converged, scale, history)


def _sampled_search(f, P, cfg, x, seed, record):
    scale = cfg.scale if cfg.scale is not None else surrogate_scale(f)
    target = cfg.epsilon * scale
    history = []
    converged = False
    gap = np.inf
    it = 0
    while True:
        g, se = estimate_gradient(f, x, cfg.samples, seed, key=("local-search", it))
        v = P.maximize_linear(g)
        gap = float((v - x) @ g)
        radius = 3.0 * float(np.abs(v - x) @ se)
        if gap <= target + radius:
            converged = True
            break
        if it >= cfg.max_iterations:
            break
        if record:
            history.append({"gap": gap, "radius": radius, "step": cfg.step})
        x = _move(x, v, cfg.step)
        it += 1
    est = estimate_multilinear(f, x, max(cfg.samples, 2), derive_seed(seed, "local-search-value"))
    return LocalSearchResult(x, gap, it, est.mean, converged, scale, history)


@dataclass
class ExchangeCheck:
    passed: bool
    worst_vertex: np.ndarray
    worst_slack: float
    scale: float
    vertices_checked: int


def check_exchange_inequality(f, P, x, epsilon, scale=None, ml=None, tol=TOL):
    """Check 2F(x) >= F(x ^ y) + F(x v y) - 2 epsilon scale at every vertex y of P.

    ``scale`` defaults to the brute-force f(OPT).  The slack reported is
    the left side minus the right side; the check passes when the smallest
    slack is >= -tol * max(1, scale).
    """
    if f.n > 16:
        raise SizeError("exchange-inequality check limited to n <= 16")
    if ml is None:
        ml = Multilinear(f)
    if scale is None:
        from .brute import brute_force_opt

        scale = brute_force_opt(f, P)[1]
    x = as_point(x, f.n)
    V = np.array(P.enumerate_vertices())
    lo = ml.values(np.minimum(V, x[None, :]))
    hi = ml.values(np.maximum(V, x[None, :]))
    slack = 2.0 * ml.value(x) - lo - hi + 2.0 * epsilon * scale
    worst = int(np.argmin(slack))
    passed = bool(slack[worst] >= -tol * max(1.0, scale))
    return ExchangeCheck(passed, V[worst], float(slack[worst]), float(scale), len(V))
