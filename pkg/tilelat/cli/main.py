"""
tilelat command-line entry point.

Exit codes: 0 all checks passed, 1 verified violation, 2 configuration
error, 3 I/O error.
"""
import argparse
import json
import sys
import time
from typing import Any, Dict, List, Optional

import structlog
from pydantic import ValidationError

from tilelat.cli.commands import COMMANDS
from tilelat.cli.models import RunConfig
from tilelat.config import get_experiment_config, get_settings
from tilelat.errors import CertificationError, ConfigError, TilelatError
from tilelat.observability.logging import configure_logging, get_audit_logger
from tilelat.observability.metrics import COMMAND_DURATION, write_metrics

logger = structlog.get_logger("cli")


def _add_group(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--group",
        help="group file: a bare {\"p\", \"generators\"} object, or a build document with the full "
        "generator records, coordinates and epsilon under \"group\"",
    )
    parser.add_argument("--out", help="output file; stdout when omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tilelat",
        description="Exact lattice tilings of l_p: build, certify and report.",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--metrics-out", default=None, help="write Prometheus metrics to this textfile")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="build a separated and dense subgroup")
    build.add_argument("--preset", help="named parameter set from the experiments file")
    build.add_argument("--p", type=int)
    build.add_argument("--steps", type=int)
    build.add_argument("--scheme", choices=["grid", "stream"])
    build.add_argument("--seed", type=int)
    build.add_argument("--mode", choices=["lp", "riesz"])
    build.add_argument("--eps", help="rational slack for riesz mode")
    build.add_argument("--eps-schedule", choices=["fixed", "dyadic"])
    build.add_argument("--out")

    verify = sub.add_parser("verify", help="certify a property of a group")
    verify.add_argument("check", choices=["separation", "density", "vertex-contact", "point-finiteness"])
    _add_group(verify)
    verify.add_argument("--threshold", help="p-th power of the separation radius")
    verify.add_argument("--strict", action="store_true", default=None)
    verify.add_argument("--radius", help="p-th power of the density or tile radius")
    verify.add_argument("--samples", type=int)
    verify.add_argument("--seed", type=int)
    verify.add_argument("--max-tiles", type=int)

    voronoi = sub.add_parser("voronoi", help="Voronoi cell and inclusion certificate (p = 2)")
    _add_group(voronoi)
    voronoi.add_argument("--r-dense", help="squared density radius")
    voronoi.add_argument("--r-sep", help="squared separation radius")
    voronoi.add_argument("--site", type=json.loads, help='site as JSON, e.g. [[0, "2/1"]]')
    voronoi.add_argument("--directions", type=int, help="number of seeded directions; 0 skips the outer check")
    voronoi.add_argument("--directions-from", dest="direction_source", choices=["coordinates", "neighbours"],
                         help="draw directions over the group coordinates or from short neighbour normals")
    voronoi.add_argument("--seed", type=int)

    report = sub.add_parser("report", help="tiling report (JSON and CSV)")
    _add_group(report)
    report.add_argument("--preset", help="take --stages from a named parameter set")
    report.add_argument("--radii", nargs="+", help="p-th powers of the ball-count radii")
    report.add_argument("--tile-radius")
    report.add_argument("--delta", help="p-th power of the neighbourhood radius (p = 2)")
    report.add_argument("--samples", type=int)
    report.add_argument("--seed", type=int)
    report.add_argument("--stages", nargs="+", type=int, help="rebuild at these step counts")

    basis = sub.add_parser("basis", help="free basis of a generated group")
    basis.add_argument("--generators", dest="generators_file", help="JSON list of vectors or a group file")
    basis.add_argument("--canonical", action="store_true", default=None, help="always return the Hermite basis")
    basis.add_argument("--out")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge command defaults, an optional preset and explicit flags (in that order)"""
    experiments = get_experiment_config()
    merged: Dict[str, Any] = experiments.get_defaults(args.command)
    preset = getattr(args, "preset", None)
    if preset:
        values = experiments.get_preset(preset)
        if not values:
            raise ConfigError(f"unknown preset '{preset}'", preset=preset)
        merged.update(values)
    merged.update(
        {key: value for key, value in vars(args).items() if value is not None and key in RunConfig.model_fields}
    )
    merged["command"] = args.command
    try:
        return RunConfig(**merged)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.errors()[0]['msg']}", errors=exc.errors()) from exc


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(level=args.log_level)
    audit = get_audit_logger()
    start = time.perf_counter()
    config_json: Dict[str, Any] = {"command": args.command}
    status = "ok"
    try:
        config = resolve_config(args)
        config_json = config.to_json()
        exit_code = COMMANDS[config.command](config)
        if exit_code:
            status = "violation"
    except TilelatError as exc:
        if isinstance(exc, CertificationError):
            audit.log_violation(args.command, type(exc).__name__, exc.message, witness=exc.witness)
        logger.error("command_failed", command=args.command, error=type(exc).__name__, message=exc.message)
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        exit_code = exc.exit_code
        status = "error"

    elapsed = time.perf_counter() - start
    COMMAND_DURATION.labels(command=args.command).observe(elapsed)
    audit.log_command(args.command, config_json, status, exit_code, elapsed * 1000)
    metrics_path = args.metrics_out or get_settings().metrics_path
    if metrics_path:
        try:
            write_metrics(metrics_path)
        except OSError as exc:
            logger.error("metrics_write_failed", path=metrics_path, error=str(exc))
            exit_code = exit_code or 3
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
