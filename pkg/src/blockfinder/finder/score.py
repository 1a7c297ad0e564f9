from typing import Optional, Sequence

from blockfinder.const.defaults import SCALE
from blockfinder.exceptions import InvalidCandidateError, PivotRatioZeroError
from blockfinder.utils import fx_div


def score(alphas: Sequence[int], balances: Sequence[int], m: Optional[int] = None) -> int:
    """m - sum_i |alpha_i - balance_i / sum_j balance_j|, all in fixed-point.

    Fractions are floored, so scaling every balance by the same factor never
    changes the result
    """
    if len(alphas) != len(balances):
        raise ValueError(f'Got {len(alphas)} alphas for {len(balances)} balances')
    if m is None:
        m = len(alphas)
    elif m != len(alphas):
        raise ValueError(f'm = {m} does not match {len(alphas)} alphas')

    total = sum(balances)
    if total <= 0:
        raise InvalidCandidateError('Candidate balances sum to zero')

    dist = 0
    for alpha, bal in zip(alphas, balances):
        dist += abs(alpha - fx_div(bal, total))
    return m * SCALE - dist


def normalized_score(s: int, m: int) -> int:
    if m < 1:
        raise ValueError(f'm should be >= 1, got {m}')
    return s // m


def target_balance(a_balance: int, alpha_1: int, alpha_i: int) -> int:
    """Balance an account needs to stand to a_balance as alpha_i stands to alpha_1"""
    if alpha_1 <= 0:
        raise PivotRatioZeroError('Pivot alpha is zero, the target ratio is undefined')
    return a_balance * alpha_i // alpha_1


def target_slack(a_balance: int, alpha_1: int, alpha_i: int) -> int:
    """Bound on how far target_balance can land from the balance of a tuple whose
    alphas were floored to the last fixed-point place: ceil(a * (alpha_1 + alpha_i) / alpha_1^2) + 1
    """
    if alpha_1 <= 0:
        raise PivotRatioZeroError('Pivot alpha is zero, the target ratio is undefined')
    return -(-a_balance * (alpha_1 + alpha_i) // (alpha_1 * alpha_1)) + 1
