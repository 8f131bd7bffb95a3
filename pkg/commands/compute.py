# commands/compute.py

from __future__ import annotations

import logging

from analysis.pipeline import compute_ruin_table
from commands.run_config import RunConfig, write_output
from utils.table_render import render

logger = logging.getLogger(__name__)


def run_compute(cfg: RunConfig) -> int:
    """Finite-horizon rows T = 1..t_max plus the ultimate row for one model file."""
    model = cfg.require_model()
    table = compute_ruin_table(model, cfg.u_max, cfg.t_max, cfg.solve_options())
    logger.info("Computed %s in %.3fs", model.name or cfg.model_path, table.summary["total_seconds"])
    write_output(render(table, cfg.output_format), cfg.output_path)
    return 0
