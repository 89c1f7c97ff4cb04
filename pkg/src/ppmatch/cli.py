"""``match-bench``: command-line front end for the experiment harness.

One subcommand per experiment kind. Options given on the command line
override the JSON config file; with no config file the desk-scale defaults
apply. Exit codes: 0 success, 2 configuration error, 3 runtime/numerical
error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .errors import ConfigError, PpmatchError
from .harness import (
    EXPERIMENTS,
    METHODS,
    SCHEME_LABELS,
    ExperimentConfig,
    config_from_dict,
    emit_csv,
    emit_summary_csv,
    load_config,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

_UNSET = object()


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated float list: {exc}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated int list: {exc}")


def _str_list(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def _tristate(text: str) -> bool | None:
    lowered = text.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    if lowered == "auto":
        return None
    raise argparse.ArgumentTypeError(f"expected true, false or auto, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="match-bench",
        description="Monte Carlo benchmarks for seeded graph matching on correlated graph models.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (CLI flags override it)")
    common.add_argument("--n", type=int, help="graph size")
    common.add_argument("--sigma-grid", type=_float_list, help="comma-separated noise levels")
    common.add_argument("--runs", type=int, help="Monte Carlo runs per grid point")
    common.add_argument("--seed", type=int, help="master 64-bit seed")
    common.add_argument("--iters", type=int, help="power iterations (where applicable)")
    common.add_argument("--out", default="results.csv", help="output CSV path")
    common.add_argument("--summary-out", help="optional per-grid-point summary CSV")
    common.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    common.add_argument(
        "--remove-diagonal",
        type=_tristate,
        default=_UNSET,
        help="true|false|auto (auto keeps diagonals only for single-iteration runs)",
    )
    common.add_argument("--eta", type=float, help="Cauchy kernel width for grampa")
    common.add_argument("--seed-overlap", type=float, help="seed overlap fraction")
    common.add_argument(
        "--no-timing",
        action="store_true",
        help="write zero wall_seconds (byte-stable output across machines)",
    )

    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for kind in EXPERIMENTS:
        p = sub.add_parser(kind, parents=[common], help=f"run the {kind} experiment")
        if kind == "refine":
            p.add_argument(
                "--methods", type=_str_list, help=f"comma-separated subset of {','.join(METHODS)}"
            )
        if kind == "seed-sweep":
            p.add_argument("--overlap-grid", type=_float_list, help="seed overlap fractions")
        if kind == "iter-sweep":
            p.add_argument("--iteration-grid", type=_int_list, help="iteration counts")
        if kind == "sparsify-sweep":
            p.add_argument(
                "--schemes", type=_str_list, help=f"comma-separated subset of {','.join(SCHEME_LABELS)}"
            )
            p.add_argument("--density", type=float, help="target density for threshold schemes")
        if kind == "tau-heatmap":
            p.add_argument("--density-grid", type=_float_list, help="target densities")
    return parser


_OVERRIDES = {
    "n": "n",
    "sigma_grid": "sigma_grid",
    "runs": "mc_runs",
    "seed": "master_seed",
    "iters": "iterations",
    "eta": "eta",
    "seed_overlap": "seed_overlap",
    "methods": "methods",
    "overlap_grid": "overlap_grid",
    "iteration_grid": "iteration_grid",
    "schemes": "scheme_grid",
    "density": "sparsify_density",
    "density_grid": "density_grid",
}


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        config = load_config(args.config)
        if config.experiment != args.experiment:
            raise ConfigError(
                f"config file is for {config.experiment!r} but the "
                f"{args.experiment!r} subcommand was invoked"
            )
    else:
        config = ExperimentConfig(experiment=args.experiment)

    data = dataclasses.asdict(config)
    for arg_name, field_name in _OVERRIDES.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            data[field_name] = value
    if args.remove_diagonal is not _UNSET:
        data["remove_diagonal"] = args.remove_diagonal
    if args.no_timing:
        data["record_timing"] = False
    return config_from_dict(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _build_config(args)
    except ConfigError as exc:
        print(f"match-bench: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        records = run_experiment(config, workers=args.workers)
        emit_csv(records, args.out)
        if args.summary_out:
            emit_summary_csv(records, args.summary_out)
    except ConfigError as exc:
        print(f"match-bench: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (PpmatchError, OSError) as exc:
        print(f"match-bench: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR
    failures = sum(1 for r in records if r.status != "ok")
    print(f"wrote {len(records)} records to {args.out}" + (f" ({failures} failed)" if failures else ""))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
