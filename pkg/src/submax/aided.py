"""Aided Measured Continuous Greedy (discrete form) and its analytic bounds.

Time runs from 0 to 1 on a two-phase grid.  Before the switch time t_s the
linear direction step gives weight -1 to every element of the guide set Z,
which keeps those coordinates at exactly zero; afterwards it is plain
Measured Continuous Greedy.  Each step moves

    y <- y + delta * (1 - y) * x

towards the vertex x returned by the linear oracle.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np

from .extensions import Multilinear, estimate_weights, product_measure
from .setfn import as_mask

_GRID_TOL = 1e-9


@dataclass(frozen=True)
class Schedule:
    t_s: float
    delta1: float
    delta2: float

    def __post_init__(self):
        if not 0.0 <= self.t_s <= 1.0:
            raise ValueError("t_s must lie in [0, 1]")
        for span, delta, name in ((self.t_s, self.delta1, "delta1"), (1.0 - self.t_s, self.delta2, "delta2")):
            if span == 0:
                continue
            if not delta > 0:
                raise ValueError(f"{name} must be positive when its phase is non-empty")
            k = span / delta
            if abs(k - round(k)) > _GRID_TOL * max(1.0, k):
                raise ValueError(f"{name}={delta} does not divide its phase length {span}")

    @classmethod
    def uniform(cls, t_s, delta):
        """Largest steps <= delta that land exactly on t_s and 1."""
        t_s = float(t_s)
        n1 = math.ceil(t_s / delta - _GRID_TOL) if t_s > 0 else 0
        n2 = math.ceil((1.0 - t_s) / delta - _GRID_TOL) if t_s < 1 else 0
        return cls(t_s, t_s / n1 if n1 else 0.0, (1.0 - t_s) / n2 if n2 else 0.0)

    @classmethod
    def conservative(cls, n, t_s):
        """delta1 = t_s n^-4 and delta2 = (1 - t_s) n^-4."""
        return cls(float(t_s), t_s * float(n) ** -4, (1.0 - t_s) * float(n) ** -4)

    @property
    def steps1(self):
        return int(round(self.t_s / self.delta1)) if self.t_s > 0 else 0

    @property
    def steps2(self):
        return int(round((1.0 - self.t_s) / self.delta2)) if self.t_s < 1 else 0

    @property
    def max_delta(self):
        return max(self.delta1, self.delta2)

    def grid(self):
        """Times t_0 = 0 < ... < t_N = 1 and the step taken at each t_k (k < N)."""
        t1 = np.arange(self.steps1) * self.delta1
        t2 = self.t_s + np.arange(self.steps2) * self.delta2
        times = np.concatenate((t1, t2, [1.0]))
        deltas = np.concatenate((np.full(self.steps1, self.delta1), np.full(self.steps2, self.delta2)))
        return times, deltas


def conservative_sample_count(n):
    """r = ceil(48 n^6 ln(2n))."""
    return math.ceil(48 * n ** 6 * math.log(2 * n))


def measured_step(y, x, delta):
    return y + delta * (1.0 - y) * x


@dataclass
class Trajectory:
    """Recorded steps; row k holds t, y(t), x(t), w(t), y(t + delta) and F(y(t)).

    ``step`` is the grid index of each record, so ``t == schedule.grid()[0][step]``.
    """

    step: np.ndarray
    t: np.ndarray
    delta: np.ndarray
    y: np.ndarray
    x: np.ndarray
    w: np.ndarray
    y_next: np.ndarray
    value: np.ndarray
    final: np.ndarray
    final_value: float
    phase1: np.ndarray

    def to_csv(self, path):
        """Long-format export: one row per (step, element)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "u", "y_u", "x_u", "w_u"])
            for k in range(len(self.t)):
                for u in range(self.y.shape[1]):
                    writer.writerow([repr(float(self.t[k])), u, repr(float(self.y[k, u])),
                                     repr(float(self.x[k, u])), repr(float(self.w[k, u]))])
            for u in range(len(self.final)):
                writer.writerow(["1.0", u, repr(float(self.final[u])), "", ""])


@dataclass
class BoundTracker:
    f_opt: float
    f_opt_minus_z: float
    f_z_cap_opt: float
    f_z_cup_opt: float
    times: np.ndarray
    g_values: np.ndarray
    h1_values: np.ndarray
    h2_at_1: float
    theorem5_rhs: float
    slack_model: np.ndarray
    max_value: float


@dataclass
class AidedResult:
    y1: np.ndarray
    trajectory: Trajectory
    tracker: BoundTracker
    schedule: Schedule
    Z: np.ndarray


def theorem5_rhs(t_s, f_opt, f_z_cap_opt, f_z_cup_opt):
    """e^{t_s-1} [(2 - t_s - e^{-t_s}) f(OPT) - (1 - e^{-t_s}) f(Z & OPT) - (2 - t_s - 2e^{-t_s}) f(Z | OPT)]."""
    e = math.exp(-t_s)
    return math.exp(t_s - 1.0) * ((2.0 - t_s - e) * f_opt
                                  - (1.0 - e) * f_z_cap_opt
                                  - (2.0 - t_s - 2.0 * e) * f_z_cup_opt)


def h1(t, f_opt_minus_z, f_z_cup_opt):
    e = np.exp(-np.asarray(t, dtype=float))
    return (1.0 - e) * f_opt_minus_z - (1.0 - e - t * e) * f_z_cup_opt


def h2(t, t_s, f_opt, f_opt_cup_z, h1_at_ts):
    gain = f_opt + (math.exp(t_s) - 1.0) * max(f_opt - f_opt_cup_z, 0.0)
    return np.exp(-np.asarray(t, dtype=float)) * ((t - t_s) * gain + math.exp(t_s) * h1_at_ts)


def g_recursion(schedule, f_opt, f_opt_minus_z, f_z_cup_opt):
    """g(t_k) on the schedule grid, g(0) = 0."""
    times, deltas = schedule.grid()
    t_s = schedule.t_s
    lost = max(f_opt - f_z_cup_opt, 0.0)
    g = np.empty(len(times))
    g[0] = 0.0
    for k, (t, d) in enumerate(zip(times[:-1], deltas)):
        if k < schedule.steps1:
            target = f_opt_minus_z - (1.0 - math.exp(-t)) * f_z_cup_opt
        else:
            target = math.exp(-t) * f_opt + (math.exp(t_s - t) - math.exp(-t)) * lost
        g[k + 1] = g[k] + d * (target - g[k])
    return g


def build_tracker(f, schedule, Z, opt_mask, slack_constant=2.0, table=None):
    """Reference values and bound sequences for a run guided by Z, given OPT."""
    n = f.n
    Z = as_mask(Z, n)
    opt = as_mask(opt_mask, n)
    f_opt = f.evaluate(opt)
    f_opt_minus_z = f.evaluate(opt & ~Z)
    f_cap = f.evaluate(opt & Z)
    f_cup = f.evaluate(opt | Z)
    times, _ = schedule.grid()
    g = g_recursion(schedule, f_opt, f_opt_minus_z, f_cup)
    phase1_t = times[: schedule.steps1 + 1] if schedule.steps1 else times[:1]
    h1_vals = h1(phase1_t, f_opt_minus_z, f_cup)
    h1_ts = float(h1(schedule.t_s, f_opt_minus_z, f_cup))
    h2_1 = float(h2(1.0, schedule.t_s, f_opt, f_cup, h1_ts))
    max_value = float(table.max()) if table is not None else float(f.table().max())
    slack = slack_constant * n ** 2 * schedule.max_delta * max_value * times
    return BoundTracker(f_opt, f_opt_minus_z, f_cap, f_cup, times, g, h1_vals, h2_1,
                        theorem5_rhs(schedule.t_s, f_opt, f_cap, f_cup), slack, max_value)


def aided_mcg(f, P, Z, schedule, mode="exact", samples=1000, seed=0,
              record_every=1, reference=None, ml=None):
    """Run the discrete Aided Measured Continuous Greedy.

    ``Z`` is a boolean mask.  In exact mode the weights are the exact
    E[f(u | R(y))]; in sampled mode they average ``samples`` shared draws
    of R(y) per step.  When ``reference`` (the OPT mask) is given, a
    :class:`BoundTracker` is filled in alongside.
    """
    n = f.n
    Z = as_mask(Z, n)
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if record_every < 1:
        raise ValueError("record_every must be positive")
    exact = mode == "exact"
    if exact and ml is None:
        ml = Multilinear(f)
    times, deltas = schedule.grid()
    steps = len(deltas)
    rec = {k: [] for k in ("step", "t", "delta", "y", "x", "w", "y_next", "value", "phase1")}
    y = np.zeros(n)
    for k in range(steps):
        phase1 = k < schedule.steps1
        if exact:
            p = product_measure(y)
            w = ml.weights(y, p)
            value = ml.value(y, p)
        else:
            w, _ = estimate_weights(f, y, samples, seed, key=("aided", k))
            value = np.nan
        if phase1:
            obj = np.where(Z, -1.0, w)
        else:
            obj = w
        x = P.maximize_linear(obj)
        y_next = measured_step(y, x, deltas[k])
        if k % record_every == 0 or k == steps - 1:
            for name, val in (("step", k), ("t", times[k]), ("delta", deltas[k]), ("y", y), ("x", x), ("w", w),
                              ("y_next", y_next), ("value", value), ("phase1", phase1)):
                rec[name].append(val)
        y = y_next
    final_value = ml.value(y) if exact else np.nan
    shape = (0, n)
    traj = Trajectory(
        step=np.array(rec["step"], dtype=np.int64), t=np.array(rec["t"]), delta=np.array(rec["delta"]),
        y=np.array(rec["y"]).reshape(-1, n) if rec["y"] else np.empty(shape),
        x=np.array(rec["x"]).reshape(-1, n) if rec["x"] else np.empty(shape),
        w=np.array(rec["w"]).reshape(-1, n) if rec["w"] else np.empty(shape),
        y_next=np.array(rec["y_next"]).reshape(-1, n) if rec["y_next"] else np.empty(shape),
        value=np.array(rec["value"], dtype=float), final=y, final_value=final_value,
        phase1=np.array(rec["phase1"], dtype=bool),
    )
    tracker = None
    if reference is not None:
        tracker = build_tracker(f, schedule, Z, reference, table=ml.table if exact else None)
    return AidedResult(y, traj, tracker, schedule, Z)


def measured_continuous_greedy(f, P, schedule_or_delta=1e-3, **kwargs):
    """Plain Measured Continuous Greedy: the aided variant with t_s = 0."""
    if isinstance(schedule_or_delta, Schedule):
        schedule = schedule_or_delta
        if schedule.t_s != 0:
            raise ValueError("plain measured greedy needs t_s = 0")
    else:
        schedule = Schedule.uniform(0.0, schedule_or_delta)
    return aided_mcg(f, P, np.zeros(f.n, dtype=bool), schedule, **kwargs)
