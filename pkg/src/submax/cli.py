"""Command line interface.

Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
verification check fails.
"""
import argparse
import json
import sys

from . import bench
from .aided import Schedule
from .brute import brute_force_opt
from .instances import CONSTRAINT_KINDS, FUNCTION_KINDS, InstanceSpec, generate_instance
from .local_search import LocalSearchConfig
from .pipeline import MainParams, main_algorithm, optimize_parameters
from .polytopes import is_normalized, normalize_ground_set
from .setfn import SizeError

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(data, fmt, out_path=None):
    if fmt == "json":
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    else:
        rows = data if isinstance(data, list) else [data]
        cols = list(rows[0].keys())
        lines = [",".join(cols)]
        for r in rows:
            lines.append(",".join(_cell(r[c]) for c in cols))
        text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    return "" if v is None else str(v)


def _load_instance(path):
    try:
        return InstanceSpec.load(path)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from None


def _common(p):
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-s", type=float, default=0.372, dest="t_s")
    p.add_argument("--p", type=float, default=0.23)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--paper-schedule", action="store_true",
                   help="use delta = n^-4 per phase instead of --delta")
    p.add_argument("--epsilon", type=float, default=1e-3, help="local-search tolerance")
    p.add_argument("--out", choices=("csv", "json"), default="json")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")


def build_parser():
    parser = _Parser(prog="submax", description="Constrained non-monotone submodular maximization.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one algorithm on one instance")
    p.add_argument("instance")
    p.add_argument("--algorithm", choices=bench.ALGORITHMS, default="main")
    p.add_argument("--z-rounds", type=int, default=1)
    p.add_argument("--trajectory", help="write the greedy trajectory as CSV to this path")
    _common(p)

    p = sub.add_parser("bench", help="config-driven sweep")
    p.add_argument("config")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output")
    p.add_argument("--record-timing", action="store_true", help="add a wall_time column to CSV output")

    p = sub.add_parser("verify", help="run the combined algorithm and check every guarantee")
    p.add_argument("instance")
    p.add_argument("--theorem5-slack", type=float, default=0.02)
    p.add_argument("--main-slack", type=float, default=0.005)
    _common(p)

    p = sub.add_parser("optimize-params", help="solve the switch-time/probability program")
    p.add_argument("--resolution", type=float, default=1e-3)
    p.add_argument("--out", choices=("csv", "json"), default="json")
    p.add_argument("-o", "--output")

    p = sub.add_parser("gen", help="generate a random instance file")
    p.add_argument("kind", choices=FUNCTION_KINDS)
    p.add_argument("n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float)
    p.add_argument("--universe", type=int)
    p.add_argument("--constraint", choices=CONSTRAINT_KINDS, default="cardinality")
    p.add_argument("--k", type=int, help="cardinality bound")
    p.add_argument("--budget-fraction", type=float)
    p.add_argument("-o", "--output")
    return parser


def _cmd_run(args):
    spec = _load_instance(args.instance)
    ref = None
    if spec.n <= 20:
        f, P = spec.build()
        ref, f_opt = brute_force_opt(f, P)
    out = bench.run_algorithm(spec, args.algorithm, mode=args.mode, seed=args.seed, t_s=args.t_s, p=args.p,
                              delta=args.delta, samples=args.samples, paper_schedule=args.paper_schedule,
                              epsilon=args.epsilon, z_rounds=args.z_rounds, reference=ref)
    row = {"instance": args.instance, "algorithm": args.algorithm, "seed": args.seed, "n": spec.n,
           "value": out.value, "opt": None if ref is None else f_opt,
           "ratio": out.value / f_opt if ref is not None and f_opt > 0 else None,
           "oracle_calls": out.oracle_calls, "x": out.x.tolist()}
    if args.algorithm == "main":
        row.update(chosen=out.detail.chosen, value_x1=out.detail.value_x1, value_x2=out.detail.value_x2)
    if args.trajectory:
        traj = getattr(out.detail, "trajectory", None) or getattr(getattr(out.detail, "aided", None),
                                                                  "trajectory", None)
        if traj is None:
            raise UsageError(f"algorithm {args.algorithm} has no trajectory")
        traj.to_csv(args.trajectory)
    _emit(row, args.out, args.output)
    return EXIT_OK


def _cmd_bench(args):
    try:
        cfg = bench.load_config(args.config)
        rows = bench.run_benchmark(cfg, workers=args.workers)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except bench.ConfigError as exc:
        raise UsageError(str(exc)) from None
    timing = args.record_timing or bool(cfg.get("record_timing", False))
    text = bench.rows_to_csv(rows, timing) if args.out == "csv" else bench.rows_to_json(rows) + "\n"
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify(args):
    from .verify import verify_run

    spec = _load_instance(args.instance)
    if args.mode != "exact":
        raise UsageError("verification needs exact mode")
    f, P = spec.build()
    if not is_normalized(P):
        f, P, _, _ = normalize_ground_set(f, P)
    if f.n > 16:
        raise UsageError("verification is limited to n <= 16")
    opt, f_opt = brute_force_opt(f, P)
    params = MainParams() if (args.t_s, args.p) == (0.372, 0.23) else MainParams.with_p(args.t_s, args.p)
    schedule = Schedule.conservative(f.n, args.t_s) if args.paper_schedule else Schedule.uniform(args.t_s, args.delta)
    cfg = LocalSearchConfig(epsilon=args.epsilon, scale=f_opt or None)
    result = main_algorithm(f, P, params, seed=args.seed, schedule=schedule, ls_config=cfg, reference=opt)
    report = verify_run(f, P, result, epsilon=args.epsilon, theorem5_slack=args.theorem5_slack,
                        main_slack=args.main_slack)
    data = report.to_dict()
    if args.out == "csv":
        data = [{"check": k, "passed": v["passed"], "margin": v["margin"]} for k, v in data["verdicts"].items()]
    _emit(data, args.out, args.output)
    return EXIT_OK if report.passed else EXIT_VERIFY


def _cmd_optimize(args):
    if not 0 < args.resolution <= 1e-3:
        raise UsageError("--resolution must lie in (0, 1e-3]")
    _emit(optimize_parameters(args.resolution), args.out, args.output)
    return EXIT_OK


def _cmd_gen(args):
    params = {k: v for k, v in (("density", args.density), ("universe", args.universe)) if v is not None}
    cparams = {k: v for k, v in (("k", args.k), ("budget_fraction", args.budget_fraction)) if v is not None}
    if args.n < 1:
        raise UsageError("n must be positive")
    spec = generate_instance(args.kind, args.n, params, args.seed, args.constraint, cparams)
    if args.output:
        spec.save(args.output)
    else:
        sys.stdout.write(spec.to_json() + "\n")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "bench": _cmd_bench, "verify": _cmd_verify,
             "optimize-params": _cmd_optimize, "gen": _cmd_gen}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, SizeError, ValueError) as exc:
        print(f"submax: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
