"""``chipradar`` command line: one subcommand per experiment.

Exit codes: 0 ok, 2 configuration error, 3 runtime error, 4 a ``--check``
threshold was missed. A RunSummary JSON is written whenever the run gets
far enough to produce one.
"""

from __future__ import annotations

import argparse
import logging
import sys
import traceback
from pathlib import Path

from .config import load_config
from .errors import ChipRadarError, ConfigError
from .experiments import (
    DEFAULT_LOOPBACK_DELAY_NS,
    RunSummary,
    cmd_isar,
    cmd_loopback,
    cmd_mrr,
    cmd_sweep,
    cmd_transmit,
)
from .io import write_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_CHECK = 4

log = logging.getLogger("chipradar")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chipradar", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML configuration (defaults built in)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--check", action="store_true", help="exit 4 if a reference threshold is missed")
    common.add_argument("--backend", choices=("physical", "behavioral"))
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("mrr", parents=[common], help="ring transfer sweep: FSR and extinction ratio")
    sub.add_parser("transmit", parents=[common], help="frequency-doubled chirp: band, flatness, spurs")
    p = sub.add_parser("loopback", parents=[common], help="fixed-delay de-chirp: peak, width, SLSR")
    p.add_argument("--delay-ns", type=float, default=DEFAULT_LOOPBACK_DELAY_NS)
    p = sub.add_parser("sweep", parents=[common], help="range accuracy over a stepped target")
    p.add_argument("--start-m", type=float, default=0.30)
    p.add_argument("--stop-m", type=float, default=0.46)
    p.add_argument("--step-m", type=float, default=0.02)
    p = sub.add_parser("isar", parents=[common], help="turntable ISAR image and targets")
    p.add_argument("--scene", help="bundled scene name (two_targets, a_shape, airplane) or scatterer CSV")
    return parser


def _run(args, cfg) -> RunSummary:
    if args.command == "mrr":
        return cmd_mrr(cfg, args.out)
    if args.command == "transmit":
        return cmd_transmit(cfg, args.out)
    if args.command == "loopback":
        return cmd_loopback(cfg, args.out, args.delay_ns, args.backend)
    if args.command == "sweep":
        return cmd_sweep(cfg, args.out, args.start_m, args.stop_m, args.step_m, args.backend)
    return cmd_isar(cfg, args.out, args.scene, args.backend)


def _failure(args, code: int, message: str, config_hash: str = "") -> int:
    log.error(message)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        write_json(
            args.out / f"{args.command}_summary.json",
            {"command": args.command, "config_hash": config_hash, "error": message, "exit_code": code},
        )
    except OSError:
        pass
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.model_copy(update={"seed": args.seed})
    except ConfigError as exc:
        return _failure(args, EXIT_CONFIG, f"config error: {exc}")

    try:
        summary = _run(args, cfg)
    except ChipRadarError as exc:
        if not isinstance(exc, ValueError):
            return _failure(args, EXIT_RUNTIME, f"runtime error: {exc}", cfg.digest())
        # parameter combinations rejected by a model (aliasing, infeasible ring)
        return _failure(args, EXIT_CONFIG, f"config error: {exc}", cfg.digest())
    except Exception as exc:  # noqa: BLE001 - any failure maps to a runtime exit code
        log.debug(traceback.format_exc())
        return _failure(args, EXIT_RUNTIME, f"runtime error: {type(exc).__name__}: {exc}", cfg.digest())

    path = summary.write(args.out)
    for name, m in summary.metrics.items():
        unit = f" {m['unit']}" if m["unit"] else ""
        print(f"{name}: {m['value']}{unit}")
    for name, ok in summary.checks.items():
        print(f"check {name}: {'pass' if ok else 'FAIL'}")
    print(f"summary: {path}")
    if args.check and not summary.passed:
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
