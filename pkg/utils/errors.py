# utils/errors.py
"""
Error hierarchy shared by the library and the command line.

Every error carries the process exit code the CLI returns for it.
"""

from __future__ import annotations

from typing import List, Optional


class RuinError(Exception):
    """Base class for every expected failure."""

    exit_code = 1


# --------- input errors (exit 2) ----------

class ParseError(RuinError, ValueError):
    exit_code = 2


class EmptyWeights(RuinError, ValueError):
    exit_code = 2


class NegativeWeight(RuinError, ValueError):
    exit_code = 2


class ZeroTotal(RuinError, ValueError):
    exit_code = 2


class InvalidParameter(RuinError, ValueError):
    exit_code = 2


# --------- model shape errors (exit 3) ----------

class InvalidSeasonIndex(RuinError, ValueError):
    exit_code = 3


class WrongPeriod(RuinError, ValueError):
    exit_code = 3


# --------- net profit errors (exit 4) ----------

class NotSubcritical(RuinError):
    exit_code = 4


class NetProfitViolated(RuinError):
    exit_code = 4


# --------- solver errors (exit 5) ----------

class SolverError(RuinError):
    exit_code = 5


class NoBranchMatched(SolverError):
    pass


class IllConditionedBoundary(SolverError):
    pass


class PrecisionExhausted(SolverError):
    pass


# --------- oracle errors (exit 6) ----------

class RefuseTooLarge(RuinError):
    exit_code = 6


class InfiniteSupport(RuinError):
    exit_code = 6


# --------- verification failures ----------

class GoldenMismatch(RuinError):
    """Raised when reproduced table cells drift from the stored values."""

    exit_code = 7

    def __init__(self, message: str, cells: Optional[List[str]] = None):
        super().__init__(message)
        self.cells = list(cells or [])


class OracleDisagreement(RuinError):
    exit_code = 8

    def __init__(self, message: str, cells: Optional[List[str]] = None):
        super().__init__(message)
        self.cells = list(cells or [])
