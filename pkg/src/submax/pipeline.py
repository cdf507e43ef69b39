"""The combined algorithm: local search, then aided greedy guided by the local-search point.

Also holds the small non-convex program that picks the switch time and the
mixing probability.
"""
from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_seed, substream
from .aided import Schedule, aided_mcg
from .extensions import Multilinear, estimate_multilinear, sample_random_subset
from .local_search import LocalSearchConfig, fractional_local_search
from .polytopes import is_normalized

THEOREM3_BOUND = 0.385


def theorem3_bound():
    return THEOREM3_BOUND


@dataclass(frozen=True)
class MainParams:
    t_s: float = 0.372
    p: float = 0.23
    p1: float = 0.205
    p2: float = 0.025
    p3: float = 0.770

    def __post_init__(self):
        if not 0 <= self.t_s <= 1:
            raise ValueError("t_s must lie in [0, 1]")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if min(self.p1, self.p2, self.p3) < 0:
            raise ValueError("analysis weights must be non-negative")
        if abs(self.p1 + self.p2 + self.p3 - 1.0) > 1e-9:
            raise ValueError("p1 + p2 + p3 must equal 1")

    @classmethod
    def with_p(cls, t_s, p):
        """Parameters for an arbitrary (t_s, p); the analysis split keeps p1 = p, p2 = 0."""
        return cls(t_s, p, p, 0.0, 1.0 - p)


@dataclass
class MainResult:
    x1: np.ndarray
    x2: np.ndarray
    chosen: str
    value_x1: float
    value_x2: float
    combined: float
    Z: np.ndarray
    params: MainParams
    local_search: object = field(repr=False, default=None)
    aided: object = field(repr=False, default=None)
    z_round_values: list = field(default_factory=list)

    @property
    def output(self):
        return self.x1 if self.chosen == "x1" else self.x2


def main_algorithm(f, P, params=None, mode="exact", seed=0, *, delta=1e-3, schedule=None,
                   samples=1000, ls_config=None, selection="random", z_rounds=1,
                   reference=None, record_every=1, ml=None):
    """Local search for x1, aided greedy with Z ~ R(x1) for x2, then pick one.

    ``selection="random"`` returns x1 with probability p (the analyzed
    rule); ``"best"`` returns whichever has the larger (exact or
    estimated) value.  With ``z_rounds > 1`` the aided run is repeated for
    independent Z draws and ``value_x2`` is their average; the first draw's
    output is the one returned.
    """
    params = params or MainParams()
    if not is_normalized(P):
        raise ValueError("instance is not normalized; call normalize_ground_set first")
    if selection not in ("random", "best"):
        raise ValueError(f"unknown selection rule {selection!r}")
    exact = mode == "exact"
    if exact and ml is None:
        ml = Multilinear(f)
    if ls_config is None:
        # with a known OPT the stopping rule is measured against f(OPT) itself
        scale = f.evaluate(reference) if reference is not None else None
        ls_config = LocalSearchConfig(mode=mode, samples=samples, scale=scale or None)
    ls = fractional_local_search(f, P, ls_config, seed=derive_seed(seed, "local-search"), ml=ml)
    x1 = ls.x
    if schedule is None:
        schedule = Schedule.uniform(params.t_s, delta)
    elif abs(schedule.t_s - params.t_s) > 1e-12:
        raise ValueError("schedule switch time differs from params.t_s")

    runs = []
    for k in range(max(1, int(z_rounds))):
        Z = sample_random_subset(x1, substream(seed, "z-draw", k))
        run = aided_mcg(f, P, Z, schedule, mode=mode, samples=samples,
                        seed=derive_seed(seed, "aided", k), reference=reference,
                        record_every=record_every, ml=ml)
        runs.append(run)

    if exact:
        value_x1 = ml.value(x1)
        round_values = [ml.value(r.y1) for r in runs]
    else:
        value_x1 = estimate_multilinear(f, x1, samples, derive_seed(seed, "value-x1")).mean
        round_values = [estimate_multilinear(f, r.y1, samples, derive_seed(seed, "value-x2", k)).mean
                        for k, r in enumerate(runs)]
    value_x2 = float(np.mean(round_values))
    x2 = runs[0].y1
    if selection == "random":
        chosen = "x1" if substream(seed, "coin").random() < params.p else "x2"
    else:
        chosen = "x1" if value_x1 >= round_values[0] else "x2"
    combined = params.p * value_x1 + (1.0 - params.p) * value_x2
    return MainResult(x1, x2, chosen, value_x1, value_x2, combined, runs[0].Z, params,
                      ls, runs[0], round_values)


def _coefficients(t):
    t = np.asarray(t, dtype=float)
    scale = np.exp(t - 1.0)
    e = np.exp(-t)
    objective = scale * (2.0 - t - e)
    meet_coef = scale * (1.0 - e)
    join_coef = scale * (2.0 - t - 2.0 * e)
    return objective, meet_coef, join_coef


def optimize_parameters(resolution=1e-3, ts_values=None):
    """Solve the parameter program on a grid of switch times.

    For fixed t_s the program is linear in (p1, p2, p3): the best choice
    makes p1/2 match the join coefficient, tops up p2 only as far as the
    meet constraint needs, and spends the rest on p3.  Returns a dict with
    t_s, p1, p2, p3, p and objective.
    """
    if ts_values is None:
        if resolution > 1e-3:
            raise ValueError("resolution must be at most 1e-3")
        steps = int(round(1.0 / resolution))
        ts_values = np.arange(steps + 1) * (1.0 / steps)
    ts = np.atleast_1d(np.asarray(ts_values, dtype=float))
    obj_c, meet_c, join_c = _coefficients(ts)
    half_p1 = np.maximum(join_c, 0.0)
    top_up = np.maximum(meet_c - half_p1, 0.0)
    p3 = 1.0 / (1.0 + 2.0 * half_p1 + top_up)
    objective = p3 * obj_c
    best = int(np.argmax(objective))
    p1 = 2.0 * half_p1[best] * p3[best]
    p2 = top_up[best] * p3[best]
    return {"t_s": float(ts[best]), "p1": float(p1), "p2": float(p2), "p3": float(p3[best]),
            "p": float(p1 + p2), "objective": float(objective[best])}


def program_constraints(t_s, p1, p2, p3):
    """Slacks of the two coefficient constraints at a candidate solution."""
    _, meet_c, join_c = _coefficients(t_s)
    return float(p1 / 2 + p2 - p3 * meet_c), float(p1 / 2 - p3 * join_c)


def program_objective(t_s, p3):
    return float(p3 * _coefficients(t_s)[0])

