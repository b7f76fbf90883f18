"""Parsing and formatting of exact rationals as ``"p/q"`` strings."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable


def parse_rational(value) -> Fraction:
    """Accept ints, Fractions, or strings like ``"3/7"`` / ``"2"``; floats are rejected."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as an exact rational")


def fmt(value: Fraction | int) -> str:
    q = Fraction(value)
    return f"{q.numerator}/{q.denominator}"


def fmt_value(value) -> str:
    """Format a scalar rational, a tuple of rationals, or a float for reports."""
    if isinstance(value, (tuple, list)):
        return ";".join(fmt_value(v) for v in value)
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return fmt(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_vector(text: str) -> list[Fraction]:
    """Parse ``"1,0,2/3"`` into a list of Fractions."""
    text = text.strip()
    if not text:
        return []
    return [parse_rational(tok) for tok in text.split(",")]


def total(values: Iterable[Fraction]) -> Fraction:
    return sum(values, Fraction(0))
