"""Guarantee checks for a finished run, recomputed from scratch.

Nothing computed during the run is trusted: the function is re-tabulated,
OPT is found by enumeration, F is re-evaluated at every recorded point and
the update rule is replayed.
"""
from dataclasses import dataclass, field

import numpy as np

from .aided import g_recursion, h1, h2, theorem5_rhs
from .brute import brute_force_opt
from .extensions import Multilinear
from .local_search import check_exchange_inequality
from .pipeline import theorem3_bound
from .setfn import SizeError, as_mask

VERIFY_MAX_N = 16


@dataclass
class Verdict:
    passed: bool
    margin: float
    detail: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.margin = float(self.margin)


@dataclass
class GuaranteeReport:
    opt_set: np.ndarray
    f_opt: float
    f_opt_minus_z: float
    f_z_cap_opt: float
    f_z_cup_opt: float
    theorem5_rhs: float
    theorem3_bound: float
    value_x1: float
    value_x2: float
    combined: float
    exchange_check: object
    bound_chain: np.ndarray = field(repr=False)
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts.values())

    def failures(self):
        return [name for name, v in self.verdicts.items() if not v.passed]

    def to_dict(self):
        return {
            "opt_set": np.flatnonzero(self.opt_set).tolist(),
            "f_opt": self.f_opt,
            "f_opt_minus_z": self.f_opt_minus_z,
            "f_z_cap_opt": self.f_z_cap_opt,
            "f_z_cup_opt": self.f_z_cup_opt,
            "theorem5_rhs": self.theorem5_rhs,
            "theorem3_bound": self.theorem3_bound,
            "value_x1": self.value_x1,
            "value_x2": self.value_x2,
            "combined": self.combined,
            "ratio": self.combined / self.f_opt if self.f_opt > 0 else None,
            "bound_chain_min_margin": float(self.bound_chain.min()) if len(self.bound_chain) else None,
            "verdicts": {k: {"passed": v.passed, "margin": v.margin, "detail": v.detail}
                         for k, v in self.verdicts.items()},
            "passed": self.passed,
        }


def _verdict(margin, tol, detail=""):
    margin = float(margin)
    return Verdict(bool(margin >= -tol), margin, detail)


def coordinate_caps(schedule):
    """Upper bounds on y_u(1) outside Z and inside Z implied by the step rule."""
    keep1 = (1.0 - schedule.delta1) ** schedule.steps1 if schedule.steps1 else 1.0
    keep2 = (1.0 - schedule.delta2) ** schedule.steps2 if schedule.steps2 else 1.0
    return 1.0 - keep1 * keep2, 1.0 - keep2


def check_trajectory(f, P, aided, ml, f_opt, tol=1e-9, chain_constant=2.0):
    """Structural and bound-chain verdicts for one aided run."""
    traj, sched = aided.trajectory, aided.schedule
    Z = aided.Z
    n = f.n
    out = {}

    bad = [k for k in range(len(traj.t)) if not (P.contains(traj.y[k]) and P.contains(traj.y_next[k]))]
    out["feasible_trajectory"] = Verdict(not bad and P.contains(traj.final), 0.0 if not bad else -1.0,
                                         f"{len(bad)} infeasible records")

    replay = traj.y + traj.delta[:, None] * (1.0 - traj.y) * traj.x
    err = float(np.abs(replay - traj.y_next).max()) if len(traj.t) else 0.0
    consecutive = np.flatnonzero(np.diff(traj.step) == 1)
    link = float(np.abs(traj.y[consecutive + 1] - traj.y_next[consecutive]).max()) if len(consecutive) else 0.0
    tail = float(np.abs(traj.final - traj.y_next[-1]).max()) if len(traj.t) else 0.0
    worst = max(err, link, tail)
    out["update_identity"] = Verdict(worst == 0.0, -worst, "max deviation from replayed update")

    ph1 = traj.phase1
    frozen = 0.0
    if ph1.any() and Z.any():
        frozen = float(max(traj.y[ph1][:, Z].max(), traj.y_next[ph1][:, Z].max()))
    out["z_freeze"] = Verdict(frozen == 0.0, -frozen, "largest y_u on Z before t_s")

    cap_out, cap_z = coordinate_caps(sched)
    over = np.where(Z, traj.final - cap_z, traj.final - cap_out)
    out["coordinate_cap"] = _verdict(-over.max(), 1e-12, "cap minus y_u(1), worst element")

    opt_mask = None
    tracker = None
    if f_opt is not None:
        opt_mask, _ = brute_force_opt(f, P)
        f_omz = f.evaluate(opt_mask & ~Z)
        f_cup = f.evaluate(opt_mask | Z)
        g = g_recursion(sched, f_opt, f_omz, f_cup)
        times, _ = sched.grid()
        values = ml.values(traj.y)
        max_value = float(ml.table.max())
        slack = chain_constant * n ** 2 * sched.max_delta * max_value * times[traj.step]
        chain = values - (g[traj.step] - slack)
        final_margin = ml.value(traj.final) - (g[-1] - chain_constant * n ** 2 * sched.max_delta * max_value)
        chain = np.append(chain, final_margin)
        out["bound_chain"] = _verdict(chain.min(), tol * max(1.0, f_opt), "min F(y(t)) - g(t) + slack")
        k1 = sched.steps1
        margin_h1 = float((g[:k1 + 1] - h1(times[:k1 + 1], f_omz, f_cup)).min())
        h1_ts = float(h1(sched.t_s, f_omz, f_cup))
        margin_h2 = float(g[-1] - h2(1.0, sched.t_s, f_opt, f_cup, h1_ts))
        out["g_dominates_h"] = _verdict(min(margin_h1, margin_h2), tol, "g - h1 on phase 1, g(1) - h2(1)")
        tracker = chain
    return out, opt_mask, tracker


def verify_run(f, P, result, *, epsilon=1e-3, theorem5_slack=0.02, main_slack=0.005,
               chain_constant=2.0, tol=1e-9):
    """Build a :class:`GuaranteeReport` for a :class:`MainResult` in exact mode."""
    if f.n > VERIFY_MAX_N:
        raise SizeError(f"verification limited to n <= {VERIFY_MAX_N}")
    ml = Multilinear(f)
    opt_mask, f_opt = brute_force_opt(f, P)
    Z = as_mask(result.Z, f.n)
    f_omz = f.evaluate(opt_mask & ~Z)
    f_cap = f.evaluate(opt_mask & Z)
    f_cup = f.evaluate(opt_mask | Z)
    t_s = result.aided.schedule.t_s
    rhs = theorem5_rhs(t_s, f_opt, f_cap, f_cup)
    v1 = ml.value(result.x1)
    v2 = ml.value(result.x2)
    p = result.params.p
    combined = p * v1 + (1.0 - p) * v2
    scale = max(1.0, f_opt)

    verdicts = {
        "feasible_x1": Verdict(P.contains(result.x1), 0.0),
        "feasible_x2": Verdict(P.contains(result.x2), 0.0),
    }
    exch = check_exchange_inequality(f, P, result.x1, epsilon, scale=f_opt, ml=ml)
    verdicts["exchange_inequality"] = Verdict(exch.passed, exch.worst_slack, f"{exch.vertices_checked} vertices")
    traj_verdicts, _, chain = check_trajectory(f, P, result.aided, ml, f_opt, tol, chain_constant)
    verdicts.update(traj_verdicts)
    verdicts["theorem5"] = _verdict(v2 - (rhs - theorem5_slack * f_opt), tol * scale,
                                    "F(x2) - (rhs - slack)")
    verdicts["main_bound"] = _verdict(combined - (theorem3_bound() - main_slack) * f_opt, tol * scale,
                                      "combined - (0.385 - slack) f(OPT)")
    verdicts["expectation_identity"] = _verdict(-abs(combined - result.combined), 1e-9 * scale,
                                                "reported minus recomputed combined value")
    return GuaranteeReport(opt_mask, f_opt, f_omz, f_cap, f_cup, rhs, theorem3_bound(), v1, v2,
                           combined, exch, chain, verdicts)
