"""Command-line entry points.

Subcommands: ``bound`` evaluates a transfer bound from flags,
``estimate`` runs a complexity estimator on a CSV function-value
matrix, ``simulate`` runs a bound-validity experiment from a JSON
config, and ``sweep`` repeats it along one parameter axis. Exit codes:
0 on success, 2 on invalid flags or config, 3 on numeric failure.

Seed and output directory can also come from the METAMARGIN_SEED and
METAMARGIN_OUTPUT_DIR environment variables; flags beat the config
file, which beats the environment.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace

from .bounds import (
    DEFAULT_C0,
    BoundInputs,
    covering_transfer_bound,
    gaussian_transfer_bound,
    kway_sshot_complexity_term,
    surrogate_multimargin_bound,
    vc_transfer_bound,
)
from .complexity import (
    FunctionValueMatrix,
    dudley_bound,
    entropy_integral,
    gaussian_complexity_mc,
    greedy_epsilon_cover,
    massart_bound,
    rademacher_complexity_mc,
)
from .harness import (
    ExperimentConfig,
    bound_validity_experiment,
    sweep,
    write_result_rows,
    write_sweep_rows,
)
from .learners import NumericError

ENV_SEED = "METAMARGIN_SEED"
ENV_OUTPUT_DIR = "METAMARGIN_OUTPUT_DIR"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metamargin")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="evaluate a transfer bound from flags")
    p_bound.add_argument("--kind", default="vc",
                         choices=["vc", "gaussian", "covering", "surrogate", "kway_sshot"])
    p_bound.add_argument("--k", type=int, required=True)
    p_bound.add_argument("--rho", type=float, required=True)
    p_bound.add_argument("--delta", type=float, default=0.1)
    p_bound.add_argument("--m", type=int)
    p_bound.add_argument("--n", type=int, required=True)
    p_bound.add_argument("--v", type=int, required=True)
    p_bound.add_argument("--b", type=float, required=True)
    p_bound.add_argument("--c0", type=float, default=None)
    p_bound.add_argument("--avg-loss", type=float, default=0.0,
                         help="average empirical loss (multi-margin for --kind surrogate)")
    p_bound.add_argument("--gamma-meta", type=float, default=0.0)
    p_bound.add_argument("--gamma-task", type=float, default=0.0)
    p_bound.add_argument("--entropy-meta", type=float, default=0.0)
    p_bound.add_argument("--entropy-task", type=float, default=0.0)
    p_bound.add_argument("--s", type=int, help="support size per class (kway_sshot)")
    p_bound.add_argument("--q", type=int, help="query size per class (kway_sshot)")

    p_est = sub.add_parser("estimate", help="run a complexity estimator on a matrix CSV")
    p_est.add_argument("--input", required=True, help="function-value matrix CSV")
    p_est.add_argument("--estimator", required=True,
                       choices=["gaussian", "rademacher", "massart", "dudley", "entropy", "cover"])
    p_est.add_argument("--draws", type=int, default=2000)
    p_est.add_argument("--seed", type=int, default=None)
    p_est.add_argument("--levels", type=int, default=12)
    p_est.add_argument("--eps", type=float, help="radius for --estimator cover")

    p_sim = sub.add_parser("simulate", help="run a bound-validity experiment")
    p_sim.add_argument("--config", required=True, help="experiment config JSON")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--output", default=None, help="results CSV path")
    p_sim.add_argument("--workers", type=int, default=None)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter axis")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--axis", required=True, choices=["n", "m", "rho", "s"])
    p_sweep.add_argument("--values", required=True, help="comma-separated axis values")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--output", default=None)
    p_sweep.add_argument("--workers", type=int, default=None)
    return parser


def _cmd_bound(args: argparse.Namespace) -> int:
    kwargs = {"k": args.k, "rho": args.rho, "delta": args.delta, "n": args.n,
              "v": args.v, "b": args.b}
    if args.c0 is not None:
        kwargs["c0"] = args.c0
    if args.kind == "kway_sshot":
        if args.s is None or args.q is None:
            raise ValueError("--kind kway_sshot requires --s and --q")
        term = kway_sshot_complexity_term(
            args.k, args.s, args.q, args.n, args.rho, args.v, args.b,
            args.c0 if args.c0 is not None else DEFAULT_C0)
        print(json.dumps({"kind": "kway_sshot", "m": args.k * (args.s + args.q),
                          "complexity_term": term}))
        return 0
    if args.m is None:
        raise ValueError("--m is required for this bound kind")
    inputs = BoundInputs(m=args.m, **kwargs)
    if args.kind == "vc":
        report = vc_transfer_bound(inputs, args.avg_loss)
    elif args.kind == "surrogate":
        report = surrogate_multimargin_bound(inputs, args.avg_loss)
    elif args.kind == "gaussian":
        report = gaussian_transfer_bound(inputs, args.avg_loss, args.gamma_meta, args.gamma_task)
    else:
        report = covering_transfer_bound(inputs, args.avg_loss, args.entropy_meta, args.entropy_task)
    print(json.dumps(report.to_json()))
    return 0


def _cmd_estimate(args: argparse.Namespace) -> int:
    matrix = FunctionValueMatrix.from_csv(args.input)
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get(ENV_SEED, "0"))
    if args.estimator in ("gaussian", "rademacher"):
        fn = gaussian_complexity_mc if args.estimator == "gaussian" else rademacher_complexity_mc
        est = fn(matrix, args.draws, seed)
        print(json.dumps({"estimator": args.estimator, "mean": est.mean,
                          "std_error": est.std_error, "draws": est.draws}))
    elif args.estimator == "massart":
        print(json.dumps({"estimator": "massart", "value": massart_bound(matrix)}))
    elif args.estimator == "dudley":
        print(json.dumps({"estimator": "dudley", "levels": args.levels,
                          "value": dudley_bound(matrix, args.levels)}))
    elif args.estimator == "entropy":
        print(json.dumps({"estimator": "entropy", "levels": args.levels,
                          "value": entropy_integral(matrix, args.levels)}))
    else:
        if args.eps is None:
            raise ValueError("--estimator cover requires --eps")
        centers, size = greedy_epsilon_cover(matrix, args.eps)
        print(json.dumps({"estimator": "cover", "eps": args.eps,
                          "size": size, "centers": centers}))
    return 0


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    with open(args.config) as handle:
        data = json.load(handle)
    config = ExperimentConfig.from_json(data)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    elif "seed" not in data and ENV_SEED in os.environ:
        config = replace(config, seed=int(os.environ[ENV_SEED]))
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    output = args.output if args.output is not None else config.output_path
    if output is None:
        base = os.environ.get(ENV_OUTPUT_DIR, ".")
        output = os.path.join(base, "results.csv" if args.command == "simulate" else "sweep.csv")
    return replace(config, output_path=output)


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    start = time.perf_counter()
    rows, summary = bound_validity_experiment(config)
    write_result_rows(rows, config.output_path)
    summary["output_path"] = config.output_path
    summary["elapsed_s"] = round(time.perf_counter() - start, 3)
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"--values must be comma-separated numbers: {exc}") from exc
    start = time.perf_counter()
    rows = sweep(config, args.axis, values)
    write_sweep_rows(rows, config.output_path)
    print(json.dumps({
        "axis": args.axis,
        "values": values,
        "statuses": [r["status"] for r in rows],
        "output_path": config.output_path,
        "elapsed_s": round(time.perf_counter() - start, 3),
    }, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "bound":
            return _cmd_bound(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_sweep(args)
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
