"""Config-driven benchmark sweeps and the single-run entry point they share.

A config is a JSON object::

    {"instances": ["cut8.json", {"generate": {"kind": "cut", "n": 8, "seed": 7}}],
     "algorithms": ["mcg", "aided-mcg", "local-search", "main"],
     "seeds": [0, 1, 2],
     "mode": "exact", "delta": 0.001, "workers": 4}

Relative instance paths are resolved against the config file's directory.
Rows come back sorted by (instance, algorithm, seed) whatever the worker
count, and wall time is only written to the CSV when ``record_timing`` is
set, so equal configs give byte-identical CSV files.
"""
import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import derive_seed, substream
from .aided import Schedule, aided_mcg, measured_continuous_greedy
from .brute import brute_force_opt
from .extensions import Multilinear, estimate_multilinear, sample_random_subset
from .instances import InstanceSpec, generate_instance
from .local_search import LocalSearchConfig, fractional_local_search
from .pipeline import MainParams, main_algorithm
from .polytopes import lift, normalize_ground_set
from .setfn import TABLE_MAX_N

ALGORITHMS = ("mcg", "aided-mcg", "local-search", "main")
COLUMNS = ["instance", "algorithm", "seed", "n", "value", "opt", "ratio", "oracle_calls", "status", "error"]
_CONFIG_KEYS = {"instances", "algorithms", "seeds", "mode", "delta", "samples", "t_s", "p",
                "paper_schedule", "workers", "record_timing", "epsilon", "z_rounds"}


class ConfigError(ValueError):
    pass


@dataclass
class RunOutput:
    x: np.ndarray
    value: float
    oracle_calls: int
    detail: object


def run_algorithm(spec, algorithm, *, mode="exact", seed=0, t_s=0.372, p=0.23, delta=1e-3,
                  samples=1000, paper_schedule=False, epsilon=1e-3, z_rounds=1, reference=None):
    """Run one algorithm on one instance and return the lifted point and its value.

    The instance is normalized first (elements that cannot be chosen alone
    are dropped) and the output is lifted back to the original ground set.
    The reported value is F at the output, exact or estimated according to
    ``mode``; for ``main`` it is the combined value p F(x1) + (1 - p) F(x2).
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    f0, P0 = spec.build()
    f, P, kept, _ = normalize_ground_set(f0, P0)
    n = f.n
    ref = None if reference is None else np.asarray(reference, dtype=bool)[kept]
    if algorithm == "mcg":
        t_s = 0.0
    schedule = Schedule.conservative(n, t_s) if paper_schedule else Schedule.uniform(t_s, delta)
    exact = mode == "exact"
    scale = f.evaluate(ref) if ref is not None else None
    ls_cfg = LocalSearchConfig(epsilon=epsilon, mode=mode, samples=samples, scale=scale or None)
    f.reset_count()
    ml = Multilinear(f) if exact else None

    if algorithm == "main":
        params = MainParams() if (t_s, p) == (0.372, 0.23) else MainParams.with_p(t_s, p)
        res = main_algorithm(f, P, params, mode=mode, seed=seed, schedule=schedule, samples=samples,
                             ls_config=ls_cfg, z_rounds=z_rounds, reference=ref, ml=ml)
        return RunOutput(lift(res.output, kept, f0.n), res.combined, f.eval_count, res)
    if algorithm == "local-search":
        res = fractional_local_search(f, P, ls_cfg, seed=derive_seed(seed, "local-search"), ml=ml)
        x = res.x
    elif algorithm == "mcg":
        res = measured_continuous_greedy(f, P, schedule, mode=mode, samples=samples,
                                         seed=derive_seed(seed, "aided", 0), ml=ml)
        x = res.y1
    else:
        ls = fractional_local_search(f, P, ls_cfg, seed=derive_seed(seed, "local-search"), ml=ml)
        Z = sample_random_subset(ls.x, substream(seed, "z-draw", 0))
        res = aided_mcg(f, P, Z, schedule, mode=mode, samples=samples,
                        seed=derive_seed(seed, "aided", 0), ml=ml)
        x = res.y1
    calls = f.eval_count
    value = ml.value(x) if exact else estimate_multilinear(f, x, samples, derive_seed(seed, "value")).mean
    return RunOutput(lift(x, kept, f0.n), float(value), calls, res)


def _row(task):
    name, spec_dict, algorithm, seed, opts = task
    row = {"instance": name, "algorithm": algorithm, "seed": seed, "n": spec_dict.get("n"),
           "value": None, "opt": None, "ratio": None, "oracle_calls": None,
           "status": "ok", "error": "", "wall_time": None}
    start = time.perf_counter()
    try:
        spec = InstanceSpec.from_dict(spec_dict)
        opt_mask = None
        if spec.n <= TABLE_MAX_N:
            f, P = spec.build()
            opt_mask, row["opt"] = brute_force_opt(f, P)
        out = run_algorithm(spec, algorithm, seed=seed, reference=opt_mask, **opts)
        row["value"] = out.value
        row["oracle_calls"] = out.oracle_calls
        if row["opt"] is not None and row["opt"] > 0:
            row["ratio"] = out.value / row["opt"]
    except Exception as exc:  # one bad row must not sink the sweep
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["wall_time"] = time.perf_counter() - start
    return row


def _parse_config_text(text, source):
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{source}: config must be a JSON object")
    unknown = sorted(set(cfg) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"{source}: unknown config keys: {', '.join(unknown)}")
    if not cfg.get("instances"):
        raise ConfigError(f"{source}: 'instances' must be a non-empty list")
    algs = cfg.get("algorithms", list(ALGORITHMS))
    bad = [a for a in algs if a not in ALGORITHMS]
    if bad:
        raise ConfigError(f"{source}: unknown algorithms: {', '.join(map(str, bad))}")
    if cfg.get("mode", "exact") not in ("exact", "sampled"):
        raise ConfigError(f"{source}: mode must be 'exact' or 'sampled'")
    return cfg


def load_config(path):
    with open(path) as fh:
        cfg = _parse_config_text(fh.read(), path)
    cfg["_base_dir"] = os.path.dirname(os.path.abspath(path))
    return cfg


def _resolve_instances(cfg):
    base = cfg.get("_base_dir", os.getcwd())
    out = []
    for k, item in enumerate(cfg["instances"]):
        if isinstance(item, str):
            path = item if os.path.isabs(item) else os.path.join(base, item)
            try:
                spec = InstanceSpec.load(path)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"instance {k} ({item}): {exc}") from None
            out.append((item, spec))
        elif isinstance(item, dict) and "generate" in item:
            g = dict(item["generate"])
            try:
                spec = generate_instance(g.pop("kind"), g.pop("n"), params=g.pop("params", None),
                                         seed=g.pop("seed", 0), constraint=g.pop("constraint", "cardinality"),
                                         constraint_params=g.pop("constraint_params", None))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"instance {k}: bad generate spec: {exc}") from None
            if g:
                raise ConfigError(f"instance {k}: unknown generate keys: {', '.join(sorted(g))}")
            name = item.get("name") or (f"{spec.generator['kind']}-{spec.generator['constraint']}"
                                        f"-n{spec.n}-s{spec.seed}")
            out.append((name, spec))
        elif isinstance(item, dict):
            try:
                spec = InstanceSpec.from_dict(item)
            except ValueError as exc:
                raise ConfigError(f"instance {k}: {exc}") from None
            out.append((item.get("name", f"instance-{k}"), spec))
        else:
            raise ConfigError(f"instance {k}: expected a path or an object")
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise ConfigError("instance names must be unique")
    return out


def run_benchmark(config, workers=None):
    """Run every (instance, algorithm, seed) combination; returns sorted row dicts.

    ``config`` is a dict, a path to a JSON file or a JSON string.
    """
    if isinstance(config, str):
        if os.path.exists(config):
            config = load_config(config)
        else:
            config = _parse_config_text(config, "<config>")
    else:
        config = dict(config)
        _parse_config_text(json.dumps({k: v for k, v in config.items() if not k.startswith("_")}), "<config>")
    instances = _resolve_instances(config)
    algorithms = config.get("algorithms", list(ALGORITHMS))
    seeds = [int(s) for s in config.get("seeds", [0])]
    opts = {"mode": config.get("mode", "exact"), "delta": float(config.get("delta", 1e-3)),
            "samples": int(config.get("samples", 1000)), "t_s": float(config.get("t_s", 0.372)),
            "p": float(config.get("p", 0.23)), "paper_schedule": bool(config.get("paper_schedule", False)),
            "epsilon": float(config.get("epsilon", 1e-3)), "z_rounds": int(config.get("z_rounds", 1))}
    tasks = [(name, spec.to_dict(), alg, seed, opts)
             for name, spec in instances for alg in algorithms for seed in seeds]
    workers = int(workers if workers is not None else config.get("workers", 1))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, tasks))
    else:
        rows = [_row(t) for t in tasks]
    rows.sort(key=lambda r: (r["instance"], r["algorithm"], r["seed"]))
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, record_timing=False):
    cols = COLUMNS + (["wall_time"] if record_timing else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def rows_to_json(rows):
    return json.dumps(rows, indent=2, sort_keys=True)


def write_results(rows, path, fmt="csv", record_timing=False):
    text = rows_to_csv(rows, record_timing) if fmt == "csv" else rows_to_json(rows)
    with open(path, "w", newline="") as fh:
        fh.write(text)
