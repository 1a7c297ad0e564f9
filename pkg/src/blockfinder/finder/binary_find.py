from bisect import bisect_left, bisect_right
from typing import Optional, Sequence

from blockfinder.snapshot.snapshot import AccountBalance


def binary_find(accounts: Sequence[AccountBalance],
                b: int,
                keys: Optional[Sequence[int]] = None,
                tolerance: int = 0) -> list[AccountBalance]:
    """Locate target balance b in accounts sorted by (balance, address).

    - b outside [min - tolerance, max + tolerance]: nothing
    - exact hit: every account holding exactly b
    - otherwise: the neighbours just below and above b, together with every
      account tied with either of them

    A b within tolerance past either end is read as that end. With a tolerance,
    every account within it of b is returned as well.

    keys is the list of balances parallel to accounts; pass it to keep the call
    O(log n), it is rebuilt otherwise
    """
    if not accounts:
        return []

    _keys = keys if keys is not None else [a.balance for a in accounts]
    if b < _keys[0] - tolerance or b > _keys[-1] + tolerance:
        return []

    _b = min(max(b, _keys[0]), _keys[-1])
    lo = bisect_left(_keys, _b)
    if _keys[lo] == _b:
        start, stop = lo, bisect_right(_keys, _b, lo)
    else:
        # _keys[lo - 1] < _b < _keys[lo], lo >= 1 by the clamp above
        start = bisect_left(_keys, _keys[lo - 1])
        stop = bisect_right(_keys, _keys[lo], lo)

    if tolerance:
        # the window touches or overlaps [start, stop), the union stays one slice
        start = min(start, bisect_left(_keys, b - tolerance))
        stop = max(stop, bisect_right(_keys, b + tolerance))
    return list(accounts[start:stop])
