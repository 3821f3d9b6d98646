"""Command line front end.

  sim run <config>       execute the base config as a single run
  sim sweep <config>     execute the full sweep x replicates experiment
  sim preset <name>      execute a bundled preset (fig4 .. fig9)

Single dynamic runs emit the per-sample series; everything else emits one
CSV row per run. Output goes to stdout unless the config's ``output`` key
or --out says otherwise. Exit codes: 0 success, 1 configuration error,
2 runtime error. SIM_JOBS sets the process-pool size for sweeps.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import parse_config
from .driver import Mode, run_dynamic, run_static
from .errors import ConfigError
from .experiments import (
    PRESETS,
    emit_csv,
    figure_preset,
    run_experiment,
    samples_csv,
)


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_spec(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _cmd_run(args) -> None:
    spec = _load_spec(args.config)
    cfg = spec.base
    out = args.out or spec.output
    if cfg.mode is Mode.DYNAMIC:
        result = run_dynamic(cfg)
        _write(samples_csv(result.samples), out)
    else:
        result = run_static(cfg)
        header = (
            "immediate_satisfaction,eventual_satisfaction,"
            "steps_to_quiescence,quiescent,seed"
        )
        line = (
            f"{result.immediate_satisfaction:.6f},"
            f"{result.eventual_satisfaction:.6f},"
            f"{result.steps_to_quiescence},"
            f"{1 if result.quiescent else 0},{cfg.seed}"
        )
        _write(header + "\n" + line + "\n", out)


def _cmd_sweep(args) -> None:
    spec = _load_spec(args.config)
    rows = run_experiment(spec)
    _write(emit_csv(rows), args.out or spec.output)


def _cmd_preset(args) -> None:
    spec = figure_preset(args.name)
    if args.seed is not None:
        spec = replace(spec, master_seed=args.seed)
    if args.replicates is not None:
        spec = replace(spec, replicates=args.replicates)
    rows = run_experiment(spec)
    _write(emit_csv(rows), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Mutual-assistance community simulator on a toroidal grid.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the base config as one run")
    p_run.add_argument("config", help="path to a key = value config file")
    p_run.add_argument("--out", help="CSV output path (default stdout)")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="execute a sweep experiment")
    p_sweep.add_argument("config", help="path to a key = value config file")
    p_sweep.add_argument("--out", help="CSV output path (default stdout)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_preset = sub.add_parser("preset", help="execute a bundled experiment")
    p_preset.add_argument("name", help=f"one of: {', '.join(sorted(PRESETS))}")
    p_preset.add_argument("--out", help="CSV output path (default stdout)")
    p_preset.add_argument("--seed", type=int, help="override the master seed")
    p_preset.add_argument(
        "--replicates", type=int, help="override replicates per sweep point"
    )
    p_preset.set_defaults(func=_cmd_preset)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
