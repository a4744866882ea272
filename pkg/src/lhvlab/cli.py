"""Command line entry point.

Exit codes: 0 ok, 1 configuration or runtime error, 2 acceptance failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import acceptance
from .harness import ConfigError
from .scenarios import BUILDERS, RunConfig, dumps_report, public, sweep_csv

EXIT_OK, EXIT_ERROR, EXIT_ACCEPTANCE = 0, 1, 2

# flag name -> RunConfig field
FLAG_FIELDS = {
    "model": "model",
    "trials": "n_trials",
    "seed": "master_seed",
    "grid": "grid",
    "null_injection": "null_injection",
    "period": "period",
    "delta_t": "delta_t",
    "format": "format",
    "out": "out",
    "workers": "workers",
    "visibility": "visibility",
}


def _grid(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--model", help="linear, erased-circle, sphere, circle-3d, quantum-singlet, franson, quantum-franson")
    common.add_argument("--trials", type=int, help="trials per settings point")
    common.add_argument("--seed", type=int, help="master seed (default 42)")
    common.add_argument("--grid", type=_grid, help="comma-separated angles in radians")
    common.add_argument("--null-injection", type=float, help="double-null probability (default 1/9)")
    common.add_argument("--period", type=float, help="switching dwell time in units of delta_t (franson)")
    common.add_argument("--delta-t", type=float, help="long-short arm delay (default 1)")
    common.add_argument("--visibility", type=float, help="quantum-franson visibility")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--workers", type=int, help="worker threads")
    common.add_argument("--json", action="store_true", help="machine-readable verify output")
    common.add_argument("--corrupt-erasure", action="store_true", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="lhvlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name, helptext in (
        ("sweep", "correlation curve E(theta) as CSV"),
        ("rates", "click-pattern fractions and efficiencies"),
        ("chsh", "CHSH value, efficiency and detection-loophole bound"),
        ("noncoplanar", "circle vs sphere model on out-of-plane settings"),
        ("franson", "Franson model: static or switching phases"),
        ("verify", "run the acceptance criteria"),
    ):
        sub.add_parser(name, parents=[common], help=helptext)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.from_json_file(args.config).to_dict() if args.config else {}
    base["scenario"] = args.scenario
    for flag, name in FLAG_FIELDS.items():
        value = getattr(args, flag)
        if value is not None:
            base[name] = value
    if args.scenario == "sweep" and "format" not in base:
        base["format"] = "csv"
    return RunConfig.from_dict(base)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args: argparse.Namespace, cfg: RunConfig) -> int:
    acc = acceptance.AcceptanceConfig(
        master_seed=cfg.master_seed,
        n_trials=args.trials or acceptance.AcceptanceConfig.n_trials,
        workers=cfg.workers if args.workers else acceptance.AcceptanceConfig.workers,
        corrupt_erasure=args.corrupt_erasure,
    )
    if args.trials:
        acc = dataclasses.replace(acc, franson_static_trials=max(1, args.trials // 10))
    results = acceptance.run_all(acc)
    text = acceptance.format_json(results, acc) if args.json else acceptance.format_table(results)
    _emit(text, cfg.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def run_scenario(cfg: RunConfig) -> str:
    report = BUILDERS[cfg.scenario](cfg)
    if cfg.scenario == "sweep" and cfg.format == "csv":
        return sweep_csv(report)
    return dumps_report(public(report))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.corrupt_erasure:
            cfg = dataclasses.replace(cfg, weight_power=2.0)
        if cfg.scenario == "verify":
            return cmd_verify(args, cfg)
        _emit(run_scenario(cfg), cfg.out)
    except (ConfigError, ValueError, OSError, TypeError) as exc:
        print(f"lhvlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
