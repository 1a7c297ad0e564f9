"""Portfolio matching over a balance snapshot.

Pivot on the smallest currency database: for each of its accounts, derive the
balance every other currency's account would need to respect the portfolio
ratios, bracket it with binary_find and score the Cartesian product of the
brackets.
"""

import heapq
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from tabulate import tabulate

from blockfinder.const.defaults import SCALE, SearchDefaults
from blockfinder.exceptions import InvalidConfigError, PortfolioMismatchError
from blockfinder.logger import MyLogger
from blockfinder.snapshot.snapshot import AccountBalance, CurrencyDb, Snapshot
from blockfinder.utils import format_fixed

from .binary_find import binary_find
from .portfolio import Portfolio
from .score import normalized_score, score, target_balance, target_slack

logger = MyLogger('finder')


@dataclass(kw_only=True)
class FinderParams:

    score_threshold: int = 0
    max_answers: Optional[int] = None
    candidate_product_limit: int = SearchDefaults.CANDIDATE_PRODUCT_LIMIT

    def __post_init__(self):
        if self.max_answers is not None and self.max_answers < 1:
            raise InvalidConfigError(f'max_answers should be a positive integer, got {self.max_answers}')
        if self.candidate_product_limit < 1:
            raise InvalidConfigError('candidate_product_limit should be >= 1')


@dataclass(frozen=True)
class AnswerTuple:
    """One account per searched currency, ordered by currency_id"""

    accounts: tuple[tuple[int, AccountBalance], ...]
    score: int

    @property
    def m(self) -> int:
        return len(self.accounts)

    @property
    def addresses(self) -> tuple[int, ...]:
        return tuple(acc.address for _, acc in self.accounts)

    @property
    def normalized_score(self) -> int:
        return normalized_score(self.score, self.m)

    @property
    def rank_key(self) -> tuple:
        return (-self.score, self.addresses)

    def address_of(self, currency_id: int) -> int:
        for cid, acc in self.accounts:
            if cid == currency_id:
                return acc.address
        raise KeyError(currency_id)

    def to_dict(self) -> dict:
        return {
            'accounts': [{'currency': cid, 'address': acc.address, 'balance': format_fixed(acc.balance)}
                         for cid, acc in self.accounts],
            'score': format_fixed(self.score),
            'normalized_score': format_fixed(self.normalized_score),
        }


@dataclass
class FinderResult:

    best: Optional[AnswerTuple]
    retained: list[AnswerTuple] = field(default_factory=list)
    # searched currencies in search order, the pivot first
    searched_currencies: list[int] = field(default_factory=list)
    excluded_currencies: list[int] = field(default_factory=list)
    pivots: int = 0
    pivot_misses: int = 0
    overflow_pivots: int = 0
    tuples_scored: int = 0

    @property
    def hit(self) -> bool:
        return self.best is not None

    def to_dict(self, top: Optional[int] = None) -> dict:
        retained = self.retained if top is None else self.retained[:top]
        return {
            'best': None if self.best is None else self.best.to_dict(),
            'retained': [a.to_dict() for a in retained],
            'diagnostics': {
                'hit': self.hit,
                'searched_currencies': self.searched_currencies,
                'excluded_currencies': self.excluded_currencies,
                'pivots': self.pivots,
                'pivot_misses': self.pivot_misses,
                'overflow_pivots': self.overflow_pivots,
                'tuples_scored': self.tuples_scored,
                'retained': len(self.retained),
            },
        }


class _AnswerCollector:
    """Keeps every answer, or only the best max_answers of them"""

    def __init__(self, max_answers: Optional[int] = None):
        self.max_answers = max_answers
        self._all: list[AnswerTuple] = []
        # min-heap whose top is the worst kept answer
        self._heap: list[tuple[int, tuple[int, ...], AnswerTuple]] = []

    def add(self, answer: AnswerTuple):
        if self.max_answers is None:
            self._all.append(answer)
            return

        item = (answer.score, tuple(-x for x in answer.addresses), answer)
        if len(self._heap) < self.max_answers:
            heapq.heappush(self._heap, item)
        elif item[:2] > self._heap[0][:2]:
            heapq.heapreplace(self._heap, item)

    def extend(self, answers: list[AnswerTuple]):
        for answer in answers:
            self.add(answer)

    def ranked(self) -> list[AnswerTuple]:
        answers = self._all if self.max_answers is None else [x[2] for x in self._heap]
        return sorted(answers, key=lambda a: a.rank_key)


@dataclass
class SearchSpace:

    dbs: list[CurrencyDb]
    alphas: list[int]
    # position in dbs of each currency, in currency_id order
    output_order: list[int]

    @property
    def currency_ids(self) -> list[int]:
        return [db.currency_id for db in self.dbs]


@dataclass
class _Partial:

    answers: list[AnswerTuple]
    pivot_misses: int = 0
    overflow_pivots: int = 0
    tuples_scored: int = 0


def _search_pivots(space: SearchSpace, start: int, stop: int, params: FinderParams) -> _Partial:
    pivot_db, others = space.dbs[0], space.dbs[1:]
    alpha_1 = space.alphas[0]
    cids = space.currency_ids
    out = space.output_order
    m = len(space.dbs)

    collector = _AnswerCollector(params.max_answers)
    partial = _Partial(answers=[])

    for a in pivot_db.accounts[start:stop]:
        candidates: list[list[AccountBalance]] = [[a]]
        for db, alpha_i in zip(others, space.alphas[1:]):
            found = binary_find(db.accounts, target_balance(a.balance, alpha_1, alpha_i), keys=db.balances,
                                tolerance=target_slack(a.balance, alpha_1, alpha_i))
            if not found:
                break
            candidates.append(found)

        if len(candidates) < m:
            partial.pivot_misses += 1
            continue

        if math.prod(len(c) for c in candidates) > params.candidate_product_limit:
            partial.overflow_pivots += 1
            continue

        for combo in itertools.product(*candidates):
            s = score(space.alphas, [acc.balance for acc in combo], m)
            partial.tuples_scored += 1
            if s >= params.score_threshold:
                collector.add(AnswerTuple(tuple((cids[k], combo[k]) for k in out), s))

    partial.answers = collector.ranked()
    return partial


def build_search_space(snapshot: Snapshot, portfolio: Portfolio) -> tuple[SearchSpace, list[int]]:
    if set(portfolio.currency_ids) != set(snapshot.currency_ids):
        raise PortfolioMismatchError(
            f'Portfolio currencies {portfolio.currency_ids} do not match snapshot currencies {snapshot.currency_ids}')

    # Zero allocations say nothing about an account, drop them before picking the pivot
    dbs = [db for db in snapshot.dbs if portfolio.alpha(db.currency_id) > 0]
    excluded = sorted(db.currency_id for db in snapshot.dbs if portfolio.alpha(db.currency_id) == 0)

    alphas = [portfolio.alpha(db.currency_id) for db in dbs]
    output_order = sorted(range(len(dbs)), key=lambda k: dbs[k].currency_id)
    return SearchSpace(dbs, alphas, output_order), excluded


def find_accounts(snapshot: Snapshot,
                  portfolio: Portfolio,
                  params: Optional[FinderParams] = None,
                  workers: int = 1) -> FinderResult:
    """Best-scoring account tuple for a portfolio, plus every tuple scoring at least
    the threshold (or the best max_answers of them).

    Equal scores are broken by the smallest address tuple in currency_id order,
    so the answer does not depend on how pivots are split between workers
    """
    _params = params or FinderParams()
    space, excluded = build_search_space(snapshot, portfolio)
    m = len(space.dbs)

    result = FinderResult(best=None, searched_currencies=space.currency_ids, excluded_currencies=excluded)

    if _params.score_threshold > m * SCALE:
        logger.warning('Threshold %s exceeds the best possible score %d, nothing can match',
                       format_fixed(_params.score_threshold), m)
        return result

    n_pivots = len(space.dbs[0])
    result.pivots = n_pivots
    if n_pivots == 0:
        logger.info('Pivot currency %d has no funded account, nothing to search', space.dbs[0].currency_id)
        return result

    if workers > 1 and n_pivots > workers:
        n_chunks = workers * 4
        bounds = [n_pivots * k // n_chunks for k in range(n_chunks + 1)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_search_pivots, space, lo, hi, _params)
                       for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
            partials = [f.result() for f in futures]
    else:
        partials = [_search_pivots(space, 0, n_pivots, _params)]

    collector = _AnswerCollector(_params.max_answers)
    for partial in partials:
        collector.extend(partial.answers)
        result.pivot_misses += partial.pivot_misses
        result.overflow_pivots += partial.overflow_pivots
        result.tuples_scored += partial.tuples_scored

    result.retained = collector.ranked()
    result.best = result.retained[0] if result.retained else None

    if result.overflow_pivots:
        logger.warning('%d pivots skipped: candidate product above %d',
                       result.overflow_pivots, _params.candidate_product_limit)

    logger.debug('Finder summary\n%s', tabulate(
        [['searched', ', '.join(map(str, result.searched_currencies))],
         ['pivots', result.pivots],
         ['pivot misses', result.pivot_misses],
         ['tuples scored', result.tuples_scored],
         ['retained', len(result.retained)],
         ['best score', '-' if result.best is None else format_fixed(result.best.score)]]))

    return result
