# app.py
"""
Command-line entry point:  python app.py <command> [options]
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

import config
from commands.arbitrate import run_arbitrate
from commands.classify import run_classify
from commands.compute import run_compute
from commands.mc_check import run_mc_check
from commands.run_config import RunConfig, parse_boundary_index
from commands.tables import run_tables
from utils.errors import GoldenMismatch, OracleDisagreement, RuinError
from utils.table_render import FORMATS

logger = logging.getLogger("ruin")

# --------- ROUTER ----------
HANDLERS = {
    "compute": run_compute,
    "tables": run_tables,
    "mc-check": run_mc_check,
    "classify": run_classify,
    "arbitrate": run_arbitrate,
}


def _boundary(value: str):
    try:
        return parse_boundary_index(value)
    except RuinError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="app.py",
        description="Finite-time and ultimate ruin probabilities for seasonal discrete-time risk models.",
    )
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="DEBUG, INFO, WARNING or ERROR (default from RUIN_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_model: bool = True) -> None:
        if needs_model:
            p.add_argument("--model", dest="model_path", required=True, help="model JSON file")
        p.add_argument("--format", dest="output_format", choices=FORMATS, default="pretty")
        p.add_argument("--output", dest="output_path", help="output file (directory for 'tables'); stdout if omitted")
        p.add_argument("--mode", choices=["float", "exact"], help="override the model file's numeric mode")

    def solver(p: argparse.ArgumentParser) -> None:
        p.add_argument("--boundary-index", type=_boundary, help="far-field index N or 'adaptive' (default from RUIN_BOUNDARY_INDEX)")
        p.add_argument("--no-escalation", dest="precision_escalation", action="store_false", help="fail instead of switching to extended precision")
        p.add_argument("--printed-formulas", action="store_true", help="use the printed branch formulas where they differ from the derived ones")

    p = sub.add_parser("compute", help="ruin table with rows T = 1..t_max and an 'inf' row")
    common(p)
    solver(p)
    p.add_argument("--u-max", type=int, default=20)
    p.add_argument("--t-max", type=int, default=20)

    p = sub.add_parser("tables", help="reproduce the three example tables and diff them against the printed values")
    common(p, needs_model=False)
    solver(p)
    p.add_argument("--golden", dest="golden_path", help="JSON file replacing the stored printed cells")

    p = sub.add_parser("mc-check", help="Monte Carlo z-scores against the dynamic programme")
    common(p)
    p.add_argument("--n-paths", type=int, help="simulated paths per surplus (default 100000)")
    p.add_argument("--seed", type=int, help="simulation seed (default 42)")

    p = sub.add_parser("classify", help="net profit class, branch and leading aggregate atom")
    common(p)

    p = sub.add_parser("arbitrate", help="printed vs derived branch formulas, judged by the generic solver and MC")
    common(p)
    solver(p)
    p.add_argument("--u-max", type=int, default=5)
    p.add_argument("--n-paths", type=int, help="simulated paths per surplus (default 20000)")
    p.add_argument("--seed", type=int, help="simulation seed (default 42)")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    return RunConfig(**fields)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = _run_config(args)
        return HANDLERS[cfg.command](cfg)
    except RuinError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        if isinstance(exc, (GoldenMismatch, OracleDisagreement)):
            for cell in exc.cells:
                logger.error("  %s", cell)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
