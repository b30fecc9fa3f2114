"""Exact rational values: lossless coercion and canonical formatting."""

from fractions import Fraction


def as_rational(value) -> Fraction:
    """Coerce to Fraction without loss.

    Accepts Fraction, int, and strings in "num/den" or decimal form
    ("3/10", "0.3", "3"). Floats are rejected; their binary expansion
    rarely matches the decimal the caller had in mind.
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a rational value, got {value!r}")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r} ({exc})") from None
    if isinstance(value, float):
        raise ValueError(
            f"refusing float {value!r}: pass the decimal as a string to keep it exact")
    raise ValueError(f"expected a rational value, got {type(value).__name__}")


def format_rational(value) -> str:
    """Lowest-terms "num/den" string, or a bare integer when whole."""
    return str(Fraction(value))
