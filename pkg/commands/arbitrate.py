# commands/arbitrate.py

from __future__ import annotations

import json

from commands.run_config import RunConfig, write_output
from services.arbitration_service import arbitrate
from utils.errors import OracleDisagreement

DEFAULT_PATHS = 20000
DEFAULT_SEED = 42


def run_arbitrate(cfg: RunConfig) -> int:
    """Printed vs derived branch formulas for one model, judged by the generic solver and MC."""
    model = cfg.require_model()
    u_values = sorted({u for u in (0, 1, 2, 5) if u <= cfg.u_max} | {cfg.u_max})
    report = arbitrate(
        model,
        u_values=u_values,
        opts=cfg.solve_options(),
        mc_paths=cfg.paths_or(DEFAULT_PATHS),
        seed=cfg.seed_or(DEFAULT_SEED),
    )
    if cfg.output_format == "json":
        text = json.dumps(report.as_dict(), indent=2, ensure_ascii=False) + "\n"
    else:
        text = report.describe() + "\n"
    write_output(text, cfg.output_path)

    if not report.consistent:
        raise OracleDisagreement(
            f"Branch {report.branch}: derived formula, generic solver and simulation disagree",
            cells=[str(c.as_dict()) for c in report.cells if not c.derived_agrees],
        )
    return 0
