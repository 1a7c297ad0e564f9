"""Fixed-point helpers. A value is a plain int holding x * 10**12, stored values are
kept inside the signed 64-bit range so they fit int64 columns.
"""

import decimal
from decimal import Decimal

from blockfinder.const.defaults import FRAC_DIGITS, SCALE, INT64_MAX
from blockfinder.exceptions import FixedPointOverflowError

FixedInput = int | float | str | Decimal

_CONTEXT = decimal.Context(prec=40, rounding=decimal.ROUND_DOWN)


def check_range(value: int, what: str = 'value') -> int:
    if value > INT64_MAX or value < -INT64_MAX - 1:
        raise FixedPointOverflowError(
            f'{what} {format_fixed(value)} is outside the fixed-point range')
    return value


def to_fixed(value: FixedInput, what: str = 'value') -> int:
    """Parse a human value (int, decimal string, Decimal or float) into fixed-point.

    Floats go through their shortest repr, so 0.1 becomes exactly 0.1
    """
    if isinstance(value, bool):
        raise TypeError(f'{what} should be a number, got a bool')

    if isinstance(value, float):
        _dec = Decimal(repr(value))
    elif isinstance(value, (int, str, Decimal)):
        try:
            _dec = Decimal(value)
        except decimal.InvalidOperation as e:
            raise ValueError(f'{what} is not a valid decimal: {value!r}') from e
    else:
        raise TypeError(f'{what} should be a number or a decimal string, got {type(value).__name__}')

    if not _dec.is_finite():
        raise ValueError(f'{what} should be finite, got {value!r}')

    with decimal.localcontext(_CONTEXT):
        ret = int((_dec * SCALE).to_integral_value())

    return check_range(ret, what)


def format_fixed(value: int) -> str:
    """Canonical decimal string: no exponent, trailing zeros stripped, at least one digit after the dot"""
    sign = '-' if value < 0 else ''
    whole, frac = divmod(abs(value), SCALE)
    frac_str = str(frac).rjust(FRAC_DIGITS, '0').rstrip('0') or '0'
    return f'{sign}{whole}.{frac_str}'


def fx_mul(a: int, b: int) -> int:
    return a * b // SCALE


def fx_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError('fixed-point division by zero')
    return a * SCALE // b
