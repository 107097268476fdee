"""Fixed-point money arithmetic.

Every budget, bid, payment, and cost in the simulator is an integer count of
micro-units (1e-6 of a currency unit), so feasibility comparisons are exact.
Floats appear only at the boundaries: scenario files, CSV emission, and the
joules-to-money conversion, all of which round half-to-even into fixed point.
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation

#: micro-units per currency unit
SCALE = 10**6

_MICRO = Decimal(1).scaleb(-6)


def to_micros(amount: float | int | str) -> int:
    """Convert a currency amount to integer micro-units.

    Rounds half-to-even at the sixth decimal place. Accepts ints, floats
    (via their shortest decimal representation) and decimal strings.

    Raises:
        ValueError: if the amount is not a finite number.
    """
    if isinstance(amount, int) and not isinstance(amount, bool):
        return amount * SCALE
    try:
        dec = Decimal(str(amount))
    except InvalidOperation as exc:
        raise ValueError(f"not a decimal amount: {amount!r}") from exc
    if not dec.is_finite():
        raise ValueError(f"money amount must be finite, got {amount!r}")
    return int(dec.quantize(_MICRO, rounding=ROUND_HALF_EVEN).scaleb(6))


def from_micros(micros: int) -> float:
    """Convert micro-units back to a float currency amount (lossy for display only)."""
    return micros / SCALE


def format_money(micros: int) -> str:
    """Canonical decimal string with exactly six fractional digits.

    Used for CSV emission so that identical fixed-point values always
    serialize to identical bytes.
    """
    sign = "-" if micros < 0 else ""
    magnitude = abs(micros)
    return f"{sign}{magnitude // SCALE}.{magnitude % SCALE:06d}"
