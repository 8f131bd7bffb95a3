# commands/tables.py
"""
Reproduce the three published example tables from the built-in models and
diff them against the stored printed values.
"""

from __future__ import annotations

import logging
import os
from typing import Dict, List

from analysis.pipeline import RuinTable, compute_ruin_table
from commands.run_config import RunConfig, write_output
from services.golden_tables_service import (
    EXAMPLE_MODELS,
    GOLDEN_TOLERANCE,
    TABLE_U,
    CellDiff,
    assert_matches,
    compare_table,
    golden_table,
    load_golden_file,
)
from utils.model_validation import model_from_dict
from utils.table_render import render_csv

logger = logging.getLogger(__name__)

TABLE_U_MAX = max(TABLE_U)
TABLE_T_MAX = 20


def example_table(name: str, cfg: RunConfig) -> RuinTable:
    model = model_from_dict(EXAMPLE_MODELS[name], cfg.mode)
    return compute_ruin_table(model, TABLE_U_MAX, TABLE_T_MAX, cfg.solve_options(TABLE_U_MAX))


def printed_columns(table: RuinTable) -> Dict[str, List[float]]:
    """Rows of a computed table restricted to the printed columns."""
    return {label: [float(values[u]) for u in TABLE_U] for label, values in table.labelled_rows()}


def run_tables(cfg: RunConfig) -> int:
    overrides = load_golden_file(cfg.golden_path) if cfg.golden_path else {}
    folder = cfg.output_path or "."
    os.makedirs(folder, exist_ok=True)

    diffs: List[CellDiff] = []
    report = []
    for name in EXAMPLE_MODELS:
        table = example_table(name, cfg)
        path = os.path.join(folder, f"table_{name}.csv")
        write_output(render_csv(table), path)

        golden = overrides.get(name, golden_table(name))
        found = compare_table(name, printed_columns(table), golden)
        cells = sum(len(row) for row in golden.values())
        report.append(f"{name}: {cells - len(found)}/{cells} cells within {GOLDEN_TOLERANCE:g} -> {path}")
        diffs.extend(found)

    print("\n".join(report))
    if not diffs:
        print(f"all cells within {GOLDEN_TOLERANCE:g}")
    assert_matches(diffs)
    return 0
