"""Helpers for exact rational values and their text form.

All quantities in this package that admit exact arithmetic are stored as
``fractions.Fraction``.  Floats are rejected at the boundary rather than
silently converted, so a lossy value can never masquerade as exact.
"""

from fractions import Fraction

from .errors import ValidationError


def frac(value) -> Fraction:
    """Coerce an int, Fraction, or "p/q" string to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError("booleans are not rational values")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational literal: {value!r}") from exc
    raise ValidationError(
        f"expected an exact rational (int, Fraction, or 'p/q'), got {type(value).__name__}"
    )


def frac_str(value: Fraction) -> str:
    """Render a Fraction as the canonical "p/q" string, denominator included."""
    return f"{value.numerator}/{value.denominator}"
