# services/golden_tables_service.py
"""
Built-in example models and the published ruin tables they reproduce.

Cells are stored as the printed strings (a few carry four decimals) and
compared numerically.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from utils.errors import GoldenMismatch, ParseError

logger = logging.getLogger(__name__)

GOLDEN_TOLERANCE = 5e-4

# slack for cells that sit exactly half a unit away (0.0625 printed as 0.063)
_ROUNDING_SLACK = 1e-12

TABLE_U = list(range(11)) + [20]
TABLE_T: List[object] = list(range(1, 11)) + [20, "inf"]


EXAMPLE_MODELS: Dict[str, dict] = {
    "first": {
        "name": "Ruin probabilities for the first model",
        "seasons": [
            {"weights": ["0.5", "0.25", "0.25"]},
            {"weights": ["0.4", "0.3", "0.3"]},
            {"weights": ["0.3", "0.35", "0.35"]},
        ],
    },
    "poisson": {
        "name": "Ruin probabilities for the Poisson model",
        "seasons": [{"poisson": "1/2"}, {"poisson": "2/3"}, {"poisson": "4/5"}],
        "tail_eps": 1e-12,
    },
    "geometric": {
        "name": "Ruin probabilities for the geometric model",
        "seasons": [{"geometric": "3/4"}, {"geometric": "2/3"}, {"geometric": "1/3"}],
        "tail_eps": 1e-12,
    },
}


_PRINTED = {
    "first": """
1   0.5   0.25  0     0     0     0     0     0     0     0     0     0
2   0.65  0.325 0.075 0     0     0     0     0     0     0     0     0
3   0.703 0.404 0.128 0.026 0     0     0     0     0     0     0     0
4   0.733 0.445 0.169 0.046 0.007 0     0     0     0     0     0     0
5   0.751 0.475 0.2   0.066 0.014 0.002 0     0     0     0     0     0
6   0.768 0.503 0.233 0.089 0.026 0.005 0.001 0     0     0     0     0
7   0.779 0.523 0.256 0.106 0.035 0.009 0.002 0     0     0     0     0
8   0.788 0.538 0.275 0.122 0.045 0.014 0.003 0.001 0     0     0     0
9   0.796 0.554 0.295 0.139 0.056 0.019 0.006 0.001 0     0     0     0
10  0.802 0.566 0.310 0.152 0.065 0.024 0.008 0.002 0     0     0     0
20  0.836 0.632 0.402 0.243 0.138 0.075 0.038 0.018 0.008 0.003 0.001 0
inf 0.877 0.722 0.541 0.404 0.301 0.224 0.167 0.125 0.093 0.069 0.052 0.003
""",
    "poisson": """
1   0.393 0.09  0.014 0.002 0     0     0     0     0     0      0      0
2   0.481 0.152 0.037 0.008 0.001 0     0     0     0     0      0      0
3   0.535 0.205 0.066 0.019 0.005 0.001 0     0     0     0      0      0
4   0.549 0.221 0.075 0.023 0.006 0.002 0     0     0     0      0      0
5   0.562 0.236 0.086 0.028 0.009 0.002 0.001 0     0     0      0      0
6   0.576 0.254 0.099 0.036 0.012 0.004 0.001 0     0     0      0      0
7   0.581 0.26  0.103 0.038 0.013 0.004 0.001 0     0     0      0      0
8   0.585 0.266 0.109 0.042 0.015 0.005 0.002 0.001 0     0      0      0
9   0.591 0.274 0.115 0.046 0.017 0.006 0.002 0.001 0     0      0      0
10  0.593 0.277 0.118 0.048 0.018 0.007 0.002 0.001 0     0      0      0
20  0.605 0.295 0.134 0.059 0.026 0.011 0.005 0.002 0.001 0.0003 0.0001 0
inf 0.609 0.3   0.139 0.064 0.029 0.013 0.006 0.003 0.001 0.001  0.0002 0
""",
    "geometric": """
1   0.25  0.063 0.016 0.004 0.001 0     0     0     0     0     0     0
2   0.333 0.111 0.037 0.012 0.004 0.001 0     0     0     0     0     0
3   0.556 0.34  0.218 0.143 0.094 0.063 0.042 0.028 0.019 0.012 0.008 0
4   0.566 0.35  0.226 0.149 0.099 0.066 0.044 0.029 0.019 0.013 0.009 0
5   0.576 0.362 0.236 0.156 0.104 0.069 0.046 0.031 0.021 0.014 0.009 0
6   0.653 0.461 0.334 0.243 0.176 0.127 0.091 0.065 0.046 0.033 0.023 0.001
7   0.657 0.466 0.338 0.247 0.18  0.13  0.093 0.067 0.048 0.034 0.024 0.001
8   0.661 0.471 0.344 0.252 0.184 0.133 0.096 0.069 0.049 0.035 0.025 0.001
9   0.703 0.529 0.406 0.312 0.239 0.181 0.137 0.102 0.076 0.056 0.042 0.002
10  0.705 0.532 0.409 0.315 0.241 0.184 0.139 0.104 0.078 0.057 0.042 0.002
20  0.774 0.635 0.528 0.438 0.363 0.298 0.243 0.197 0.159 0.127 0.101 0.008
inf 0.927 0.879 0.84  0.803 0.769 0.736 0.705 0.675 0.647 0.619 0.593 0.385
""",
}

GoldenTable = Dict[str, List[str]]


def _parse_printed(block: str) -> GoldenTable:
    table: GoldenTable = {}
    for line in block.strip().splitlines():
        label, *cells = line.split()
        table[label] = cells
    return table


_golden_cache: Dict[str, GoldenTable] = {}


def golden_table(name: str) -> GoldenTable:
    """Printed cells keyed by horizon label ("1".."10", "20", "inf"), columns TABLE_U."""
    if name not in _PRINTED:
        raise KeyError(f"No golden table named '{name}'")
    if name not in _golden_cache:
        _golden_cache[name] = _parse_printed(_PRINTED[name])
    return _golden_cache[name]


def load_golden_file(path: str) -> Dict[str, GoldenTable]:
    """Override store: {"first": {"1": ["0.5", ...], ...}, ...}."""
    if not os.path.exists(path):
        raise ParseError(f"Golden file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Golden file {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict) or not all(
        isinstance(rows, dict) and all(isinstance(v, list) for v in rows.values()) for rows in raw.values()
    ):
        raise ParseError(f"Golden file {path} must map table names to {{horizon: [cells]}}")
    return {name: {str(k): [str(c) for c in v] for k, v in rows.items()} for name, rows in raw.items()}


@dataclass(frozen=True)
class CellDiff:
    table: str
    horizon: str
    u: int
    printed: str
    computed: float

    @property
    def gap(self) -> float:
        return abs(self.computed - float(self.printed))

    def describe(self) -> str:
        return f"{self.table}: T={self.horizon}, u={self.u}: printed {self.printed}, computed {self.computed:.6f}"


def compare_table(name: str, computed: Dict[str, Sequence[float]], golden: Optional[GoldenTable] = None) -> List[CellDiff]:
    """
    Cells further than GOLDEN_TOLERANCE from the printed value.
    ``computed`` maps horizon labels to values over TABLE_U.
    """
    golden = golden if golden is not None else golden_table(name)
    offending = []
    for label, printed_row in golden.items():
        values = computed.get(label)
        if values is None:
            continue
        for u, printed, value in zip(TABLE_U, printed_row, values):
            diff = CellDiff(name, label, u, printed, float(value))
            if diff.gap > GOLDEN_TOLERANCE + _ROUNDING_SLACK:
                offending.append(diff)
    return offending


def assert_matches(diffs: List[CellDiff]) -> None:
    if diffs:
        for diff in diffs:
            logger.warning("Golden mismatch %s", diff.describe())
        raise GoldenMismatch(
            f"{len(diffs)} cell(s) differ from the printed tables by more than {GOLDEN_TOLERANCE}",
            cells=[d.describe() for d in diffs],
        )


def table_names() -> Tuple[str, ...]:
    return tuple(EXAMPLE_MODELS)
