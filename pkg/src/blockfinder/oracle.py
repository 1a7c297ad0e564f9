"""Exhaustive reference search.

Scores every tuple of the Cartesian product of the searched currency
databases. Used to check Finder answers and to explain where the bracket
pruning loses the optimum.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from blockfinder.const.defaults import SearchDefaults
from blockfinder.exceptions import OracleLimitError
from blockfinder.finder.binary_find import binary_find
from blockfinder.finder.finder import AnswerTuple, FinderResult, build_search_space
from blockfinder.finder.portfolio import Portfolio
from blockfinder.finder.score import score, target_balance, target_slack
from blockfinder.logger import MyLogger
from blockfinder.snapshot.snapshot import Snapshot
from blockfinder.utils import format_fixed

logger = MyLogger('oracle')


@dataclass
class OracleResult:

    # None when a searched currency has no funded account
    best: Optional[AnswerTuple]
    tuples_examined: int


def exhaustive_best(snapshot: Snapshot,
                    portfolio: Portfolio,
                    limit: int = SearchDefaults.ORACLE_PRODUCT_LIMIT) -> OracleResult:

    space, _ = build_search_space(snapshot, portfolio)
    m = len(space.dbs)
    product_size = math.prod(len(db) for db in space.dbs)
    if product_size > limit:
        raise OracleLimitError(product_size, limit)

    cids = space.currency_ids
    out = space.output_order
    best: Optional[AnswerTuple] = None
    examined = 0

    for combo in itertools.product(*(db.accounts for db in space.dbs)):
        examined += 1
        s = score(space.alphas, [acc.balance for acc in combo], m)
        if best is not None and s < best.score:
            continue
        answer = AnswerTuple(tuple((cids[k], combo[k]) for k in out), s)
        if best is None or answer.rank_key < best.rank_key:
            best = answer

    logger.debug('Oracle examined %d tuples, best score %s',
                 examined, '-' if best is None else format_fixed(best.score))
    return OracleResult(best=best, tuples_examined=examined)


@dataclass
class BracketMiss:

    currency_id: int
    address: int
    balance: int
    target: int
    # Balances of the accounts binary_find returned for the target
    bracket: list[int]

    def to_dict(self) -> dict:
        return {
            'currency': self.currency_id,
            'address': self.address,
            'balance': format_fixed(self.balance),
            'target': format_fixed(self.target),
            'bracket': [format_fixed(b) for b in self.bracket],
        }


@dataclass
class GapReport:

    oracle_score: Optional[int]
    finder_score: Optional[int]
    pivot_currency: Optional[int] = None
    pivot_address: Optional[int] = None
    misses: list[BracketMiss] = field(default_factory=list)

    @property
    def gap(self) -> int:
        if self.oracle_score is None:
            return 0
        if self.finder_score is None:
            return self.oracle_score
        return self.oracle_score - self.finder_score

    def to_dict(self) -> dict:
        return {
            'oracle_score': None if self.oracle_score is None else format_fixed(self.oracle_score),
            'finder_score': None if self.finder_score is None else format_fixed(self.finder_score),
            'gap': format_fixed(self.gap),
            'pivot_currency': self.pivot_currency,
            'pivot_address': self.pivot_address,
            'misses': [x.to_dict() for x in self.misses],
        }


def explain_gap(snapshot: Snapshot,
                portfolio: Portfolio,
                finder_result: FinderResult,
                oracle_result: OracleResult) -> GapReport:
    """Which accounts of the oracle's optimum fall outside the bracket Finder searched"""

    report = GapReport(
        oracle_score=None if oracle_result.best is None else oracle_result.best.score,
        finder_score=None if finder_result.best is None else finder_result.best.score)
    if oracle_result.best is None:
        return report

    space, _ = build_search_space(snapshot, portfolio)
    chosen = dict(oracle_result.best.accounts)

    pivot_db = space.dbs[0]
    pivot = chosen[pivot_db.currency_id]
    report.pivot_currency = pivot_db.currency_id
    report.pivot_address = pivot.address

    for db, alpha_i in zip(space.dbs[1:], space.alphas[1:]):
        target = target_balance(pivot.balance, space.alphas[0], alpha_i)
        bracket = binary_find(db.accounts, target, keys=db.balances,
                              tolerance=target_slack(pivot.balance, space.alphas[0], alpha_i))
        acc = chosen[db.currency_id]
        if acc not in bracket:
            report.misses.append(BracketMiss(currency_id=db.currency_id,
                                             address=acc.address,
                                             balance=acc.balance,
                                             target=target,
                                             bracket=[x.balance for x in bracket]))

    if report.gap > 0:
        logger.warning('Finder is %s below the exhaustive optimum; pivot C%d/%d, outside bracket: %s',
                       format_fixed(report.gap), report.pivot_currency, report.pivot_address,
                       ', '.join(f'C{x.currency_id}/{x.address}' for x in report.misses) or 'none')
    return report
