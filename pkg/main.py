"""Command-line entry point for wavest: run, validate, list-presets, table1, sweep."""
import argparse
import logging
import os
import sys
from typing import List, Optional

from errors import ConfigError, WaveSolverError
from experiments import (DEFAULT_RATIOS, QUICK_SWEEP_N_X, SWEEP_N_X, TABLE1_METHODS, Check, ExperimentConfig,
                         RunReport, instability_sweep, run, sweep_checks, table1_checks, table1_matrix)
from presets import DESCRIPTIONS, LADDERS, PRESET_ALIASES, QUICK_LADDERS, resolve_preset
from solver_linear import MethodId

logger = logging.getLogger("wavest")


def print_checks(checks: List[Check]):
    for check in checks:
        mark = "✓" if check.passed else "✗"
        print(f"  {mark} {check.name}: {check.value:.3e} (expected {check.expected})")


def print_summary(report: RunReport):
    failed = [check for check in report.checks if not check.passed]
    print(f"{len(report.records)} runs, {len(report.checks)} checks, {len(failed)} failed")
    print_checks(report.checks)
    for path in report.files:
        print(f"  wrote {path}")
    print("✓ all checks passed" if report.passed else "✗ some checks failed")


def _parse_ratios(text: str) -> List[float]:
    try:
        ratios = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratios must be comma-separated numbers, got {text!r}")
    if not ratios or any(r <= 0.0 for r in ratios):
        raise argparse.ArgumentTypeError("ratios must be positive")
    return ratios


def _parse_methods(text: str) -> List[MethodId]:
    try:
        return [MethodId.parse(part.strip()) for part in text.split(",") if part.strip()]
    except WaveSolverError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def command_run(args) -> int:
    config = ExperimentConfig.load(args.config)
    if args.seed is not None:
        config.seed = args.seed
    report = run(config, quick=args.quick, out_dir=args.out, progress=args.progress)
    print_summary(report)
    return 0 if report.passed else 1


def command_validate(args) -> int:
    try:
        config = ExperimentConfig.load(args.config)
    except ConfigError as exc:
        print(f"✗ {args.config} is invalid:")
        for problem in exc.problems:
            print(f"  - {problem}")
        return 1
    print(f"✓ {args.config} is valid (preset {config.preset_key}, {len(config.methods)} methods, "
          f"{len(config.ladder)} ladder entries, hash {config.config_hash()[:12]})")
    return 0


def command_list_presets(args) -> int:
    aliases = {key: alias for alias, key in PRESET_ALIASES.items()}
    for key, description in DESCRIPTIONS.items():
        print(f"{key} ({aliases.get(key, key)}): {description}")
        print(f"    ladder {LADDERS[key]}, quick {QUICK_LADDERS[key]}")
    return 0


def command_table1(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    table = table1_matrix(quick=args.quick, progress=args.progress)
    path = os.path.join(args.out, "table1.csv")
    table.to_csv(path, index=False)
    print(table[["method", "stability", "energy", "symplecticity"]].to_string(index=False))
    checks = table1_checks(table)
    print_checks(checks)
    print(f"  wrote {path}")
    return 0 if all(check.passed for check in checks) else 1


def command_sweep(args) -> int:
    preset = resolve_preset(args.preset)
    N_x = args.n_x or (QUICK_SWEEP_N_X if args.quick else SWEEP_N_X)
    sweep = instability_sweep(preset, args.methods, args.ratios, args.p_t, args.p_x, N_x, progress=args.progress)
    print(sweep[["ratio", "method", "N_t", "bounded", "growth", "blowup_slab"]].to_string(index=False))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "sweep.csv")
        sweep.to_csv(path, index=False)
        print(f"  wrote {path}")
    checks = sweep_checks(sweep)
    print_checks(checks)
    return 0 if all(check.passed for check in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavest", description="Space-time Galerkin wave solvers and experiments.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Run an experiment config and write its result files.")
    p.add_argument("--config", required=True, help="Path to a JSON experiment config.")
    p.add_argument("--quick", action="store_true", help="Use the quick ladder and sweep mesh.")
    p.add_argument("--out", default=None, help="Output directory (defaults to the config's output_dir).")
    p.add_argument("--seed", type=int, default=None, help="Override the config seed.")
    p.add_argument("--progress", action="store_true", help="Show slab progress bars.")
    p.set_defaults(handler=command_run)

    p = sub.add_parser("validate", help="Check a config against the schema.")
    p.add_argument("--config", required=True)
    p.set_defaults(handler=command_validate)

    p = sub.add_parser("list-presets", help="Describe the built-in benchmark problems.")
    p.set_defaults(handler=command_list_presets)

    p = sub.add_parser("table1", help="Stability, energy and symplecticity of the second-order schemes.")
    p.add_argument("--out", default="results")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(handler=command_table1)

    p = sub.add_parser("sweep", help="Bounded or blown-up per method over ratios h_t / h_x.")
    p.add_argument("--preset", default="fig1")
    p.add_argument("--ratios", type=_parse_ratios, default=list(DEFAULT_RATIOS))
    p.add_argument("--methods", type=_parse_methods, default=list(TABLE1_METHODS))
    p.add_argument("--p-t", type=int, default=1)
    p.add_argument("--p-x", type=int, default=1)
    p.add_argument("--n-x", type=int, default=None, help="Spatial elements (default depends on --quick).")
    p.add_argument("--out", default=None)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(handler=command_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except ConfigError as exc:
        print("✗ invalid config:")
        for problem in exc.problems:
            print(f"  - {problem}")
        return 2
    except WaveSolverError as exc:
        logger.error("%s", exc)
        print(f"✗ {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
