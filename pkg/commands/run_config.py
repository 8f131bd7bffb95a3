# commands/run_config.py
"""
Settings of one command-line run, shared by every command.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Optional, Union

import config
from analysis.linear_forms import SolveOptions
from analysis.pmf_core import SeasonalModel
from utils.errors import ParseError
from utils.model_validation import load_model
from utils.table_render import FORMATS

logger = logging.getLogger(__name__)

COMMANDS = ("compute", "tables", "mc-check", "classify", "arbitrate")


@dataclass(frozen=True)
class RunConfig:
    command: str
    model_path: Optional[str] = None
    u_max: int = 20
    t_max: int = 20
    output_format: str = "pretty"
    output_path: Optional[str] = None
    seed: Optional[int] = None
    mode: Optional[str] = None
    n_paths: Optional[int] = None
    boundary_index: Union[int, str, None] = None
    precision_escalation: bool = True
    printed_formulas: bool = False
    golden_path: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParseError(f"Unknown command '{self.command}'")
        if self.u_max < 0 or self.t_max < 0:
            raise ParseError("--u-max and --t-max must be non-negative")
        if self.output_format not in FORMATS:
            raise ParseError(f"Unknown format '{self.output_format}'")
        if self.n_paths is not None and self.n_paths < 1:
            raise ParseError("--n-paths must be at least 1")

    def require_model(self) -> SeasonalModel:
        if not self.model_path:
            raise ParseError(f"'{self.command}' needs --model")
        return load_model(self.model_path, self.mode)

    def solve_options(self, u_max: Optional[int] = None) -> SolveOptions:
        boundary = config.BOUNDARY_INDEX if self.boundary_index is None else self.boundary_index
        return SolveOptions(
            boundary_index=boundary,
            u_max=self.u_max if u_max is None else u_max,
            precision_escalation=self.precision_escalation,
            printed_formulas=self.printed_formulas,
        )

    def seed_or(self, default: int) -> int:
        return default if self.seed is None else self.seed

    def paths_or(self, default: int) -> int:
        return default if self.n_paths is None else self.n_paths


def parse_boundary_index(value: str) -> Union[int, str]:
    text = value.strip().lower()
    if text == "adaptive":
        return text
    if text.isdigit() and int(text) > 0:
        return int(text)
    raise ParseError(f"--boundary-index must be a positive integer or 'adaptive', got {value!r}")


def write_output(text: str, output_path: Optional[str]) -> None:
    """Write to the file if given, else to stdout."""
    if not output_path:
        print(text, end="")
        return
    folder = os.path.dirname(output_path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(output_path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    logger.info("Wrote %s", output_path)
