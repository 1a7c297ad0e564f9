from decimal import Decimal

import pytest

from blockfinder.const.defaults import INT64_MAX, ONE
from blockfinder.exceptions import FixedPointOverflowError
from blockfinder.utils import check_range, format_fixed, fx_div, fx_mul, to_fixed


@pytest.mark.parametrize('value, expected', [
    ('1.4', 1_400_000_000_000),
    (0.1, 100_000_000_000),
    (3, 3 * ONE),
    (Decimal('0.000000000001'), 1),
    ('0.0000000000019', 1),  # truncated, never rounded up
])
def test_to_fixed(value, expected):
    assert to_fixed(value) == expected


def test_to_fixed_rejects_garbage():
    with pytest.raises(ValueError):
        to_fixed('abc')
    with pytest.raises(ValueError):
        to_fixed(float('nan'))
    with pytest.raises(TypeError):
        to_fixed(True)


def test_range_check():
    assert check_range(INT64_MAX) == INT64_MAX
    with pytest.raises(FixedPointOverflowError):
        check_range(INT64_MAX + 1)
    with pytest.raises(FixedPointOverflowError):
        to_fixed('10000000000')


@pytest.mark.parametrize('value, expected', [
    (1_400_000_000_000, '1.4'),
    (20 * ONE, '20.0'),
    (0, '0.0'),
    (1, '0.000000000001'),
    (-ONE // 2, '-0.5'),
])
def test_format_fixed(value, expected):
    assert format_fixed(value) == expected


def test_fixed_arithmetic():
    assert fx_mul(to_fixed('2.5'), to_fixed(4)) == to_fixed(10)
    assert fx_div(to_fixed(1), to_fixed(3)) == 333_333_333_333
    with pytest.raises(ZeroDivisionError):
        fx_div(ONE, 0)
