# analysis/scalars.py
"""
Numeric modes.

A value is a Python float, a ``fractions.Fraction`` (exact mode) or an
``mpmath.mpf`` (extended precision, used only inside the ultimate solvers).
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Iterator, Optional, Union

import mpmath

from utils.errors import ParseError

Scalar = Union[float, Fraction, Any]

FLOAT = "float"
EXACT = "exact"
MODES = (FLOAT, EXACT)

# Float probabilities may overshoot 1 by this much
FLOAT_SLACK = 1e-12

# Hard overflow limit for float coefficient rows
FLOAT_MAGNITUDE_LIMIT = 1e200

# Bits kept clear of cancellation in extended precision
GUARD_BITS = 96

FIRST_EXTENDED_BITS = 256
MAX_EXTENDED_BITS = 1 << 15


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ParseError(f"Unknown numeric mode '{mode}' (expected one of {', '.join(MODES)})")
    return mode


def parse_scalar(value: Any, mode: str) -> Scalar:
    """
    Convert a model-file number to the mode's scalar type.
    Decimal strings stay exact in exact mode ("0.25" -> 1/4).
    """
    if isinstance(value, bool):
        raise ParseError(f"Expected a number, got {value!r}")
    if mode == EXACT:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, str)):
            try:
                return Fraction(str(value).strip())
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"Cannot read {value!r} as a rational number")
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ParseError(f"Non-finite weight {value!r}")
            # floats are taken through their shortest decimal form
            return Fraction(repr(value))
        raise ParseError(f"Expected a number, got {value!r}")

    if isinstance(value, (int, float, Fraction)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"Cannot read {value!r} as a number")
    else:
        raise ParseError(f"Expected a number, got {value!r}")
    if not math.isfinite(out):
        raise ParseError(f"Non-finite weight {value!r}")
    return out


def to_decimal_text(value: Scalar, digits: int = 40) -> str:
    """Full-precision text of a value (repr for floats, 40 significant digits otherwise)."""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Fraction):
        if value == 0:
            return "0"
        with localcontext() as ctx:
            ctx.prec = digits
            quotient = Decimal(value.numerator) / Decimal(value.denominator)
        return format(quotient, "f")
    return repr(float(value))


# --------- solver arithmetic ----------

@dataclass(frozen=True)
class Arithmetic:
    """
    Arithmetic used for one ultimate solve: ``float``, ``exact`` or ``mp<bits>``.
    """

    name: str
    bits: Optional[int] = None

    @property
    def exact(self) -> bool:
        return self.name == EXACT

    @property
    def extended(self) -> bool:
        return self.bits is not None

    @property
    def label(self) -> str:
        return f"mp{self.bits}" if self.extended else self.name

    def scalar(self, value: Scalar) -> Scalar:
        if self.exact:
            return value if isinstance(value, Fraction) else Fraction(value)
        if self.extended:
            if isinstance(value, Fraction):
                return mpmath.mpf(value.numerator) / value.denominator
            return mpmath.mpf(value)
        return float(value)

    def magnitude_bits(self, value: Scalar) -> Optional[int]:
        """
        Return the number of bits needed to keep ``value`` accurate, or None
        when the value is inside the mode's safe range.
        """
        if self.exact:
            return None
        if self.extended:
            if not value:
                return None
            exponent = mpmath.mp.mag(value)
            if exponent > self.bits - GUARD_BITS:
                return int(exponent) + GUARD_BITS
            return None
        if not math.isfinite(value):
            return FIRST_EXTENDED_BITS * 4
        if abs(value) > FLOAT_MAGNITUDE_LIMIT:
            return int(math.log2(abs(value))) + GUARD_BITS
        return None

    @contextlib.contextmanager
    def active(self) -> Iterator["Arithmetic"]:
        if self.extended:
            with mpmath.mp.workprec(self.bits):
                yield self
        else:
            yield self

    def escalated(self, bits_needed: Optional[int]) -> "Arithmetic":
        current = self.bits or 0
        target = max(FIRST_EXTENDED_BITS, 2 * current, (bits_needed or 0) + 128)
        bits = 1 << (target - 1).bit_length()
        return Arithmetic("mp", bits)


FLOAT_ARITHMETIC = Arithmetic(FLOAT)
EXACT_ARITHMETIC = Arithmetic(EXACT)


def arithmetic_for(mode: str) -> Arithmetic:
    return EXACT_ARITHMETIC if mode == EXACT else FLOAT_ARITHMETIC
