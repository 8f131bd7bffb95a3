# utils/table_render.py
"""
Rendering of ruin tables: pretty text, CSV and JSON.

CSV cells carry full precision; pretty cells are rounded half away from zero
to three decimals, so re-rounding a parsed CSV reproduces the pretty table.
"""

from __future__ import annotations

import io
import json
from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Dict, List, Sequence, Tuple

import pandas as pd

from analysis.pipeline import RuinTable
from analysis.scalars import Scalar, to_decimal_text

FORMATS = ("pretty", "csv", "json")

PRETTY_DECIMALS = 3

LabelledRows = List[Tuple[str, Sequence[Scalar]]]


def round_half_up(value: Scalar, decimals: int = PRETTY_DECIMALS) -> str:
    """Round from the full decimal expansion, never from a float's binary neighbour."""
    quantum = Decimal(1).scaleb(-decimals)
    text = value if isinstance(value, str) else to_decimal_text(value)
    rounded = Decimal(text).quantize(quantum, rounding=ROUND_HALF_UP)
    # no "-0.000"
    return str(abs(rounded) if rounded.is_zero() else rounded)


def rows_frame(rows: LabelledRows, u_max: int) -> pd.DataFrame:
    frame = pd.DataFrame(
        [[to_decimal_text(v) for v in values] for _, values in rows],
        columns=[str(u) for u in range(u_max + 1)],
    )
    frame.index = [label for label, _ in rows]
    frame.index.name = "u"
    return frame


# --------- formats ----------

def render_pretty(table: RuinTable, decimals: int = PRETTY_DECIMALS) -> str:
    rows = table.labelled_rows()
    header = ["T \\ u"] + [str(u) for u in range(table.u_max + 1)]
    body = [[label] + [round_half_up(v, decimals) for v in values] for label, values in rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]

    lines = []
    if table.name:
        lines.append(table.name)
    for row in [header] + body:
        lines.append("  ".join(cell.rjust(width) for cell, width in zip(row, widths)))
    return "\n".join(lines) + "\n"


def render_csv(table: RuinTable) -> str:
    """Header "u,0,1,...,u_max", one row per horizon, last row "inf"."""
    buffer = io.StringIO()
    rows_frame(table.labelled_rows(), table.u_max).to_csv(buffer, lineterminator="\n")
    return buffer.getvalue()


def render_json(table: RuinTable) -> str:
    payload: Dict[str, Any] = {
        "metadata": table.metadata(),
        "u": list(range(table.u_max + 1)),
        "rows": {label: [to_decimal_text(v) for v in values] for label, values in table.labelled_rows()},
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def render(table: RuinTable, output_format: str) -> str:
    if output_format == "csv":
        return render_csv(table)
    if output_format == "json":
        return render_json(table)
    return render_pretty(table)


# --------- reading back ----------

def parse_csv(text: str) -> LabelledRows:
    """Rows of a rendered CSV as (label, decimal strings)."""
    frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
    # labels stay text: "1", "2", "inf"
    frame = frame.set_index(frame.columns[0])
    return [(str(label), list(frame.iloc[i])) for i, label in enumerate(frame.index)]


def pretty_cells(rows: LabelledRows, decimals: int = PRETTY_DECIMALS) -> List[List[str]]:
    return [[round_half_up(v, decimals) for v in values] for _, values in rows]
