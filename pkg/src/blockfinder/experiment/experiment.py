"""Case-study harness: plant true portfolios of simulated users, sweep the
portfolio size m and measure how often Finder answers and how well it scores.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from tabulate import tabulate
from tqdm import tqdm

from blockfinder.const.defaults import SCALE
from blockfinder.const.experiment import ExperimentConfig
from blockfinder.exceptions import OracleLimitError
from blockfinder.finder import FinderParams, Portfolio, find_accounts
from blockfinder.ledger import SimulationLog, UserAccounts, simulate
from blockfinder.logger import MyLogger
from blockfinder.oracle import exhaustive_best, explain_gap
from blockfinder.snapshot import Snapshot, replay
from blockfinder.utils import format_fixed, fx_div, fx_mul

logger = MyLogger('experiment')


def _format_rate(rate: Optional[int]) -> str:
    return '' if rate is None else format_fixed(rate)


class RowCol:

    M = 'm'
    QUERY_ID = 'query_id'
    USER_ID = 'user_id'
    CURRENCIES = 'currencies'
    HIT = 'hit'
    NORMALIZED_SCORE = 'normalized_score'
    RECOVERED = 'recovered'
    ORACLE_AGREES = 'oracle_agrees'

    @classmethod
    def to_list(cls) -> list[str]:
        return [cls.M, cls.QUERY_ID, cls.USER_ID, cls.CURRENCIES, cls.HIT,
                cls.NORMALIZED_SCORE, cls.RECOVERED, cls.ORACLE_AGREES]


@dataclass
class QueryOutcome:

    m: int
    query_id: int
    user_id: int
    currencies: tuple[int, ...]
    hit: bool = False
    normalized_score: Optional[int] = None
    recovered: bool = False
    oracle_agrees: Optional[bool] = None

    def to_row(self) -> list:
        return [self.m, self.query_id, self.user_id, ','.join(map(str, self.currencies)),
                self.hit, self.normalized_score, self.recovered, self.oracle_agrees]


@dataclass
class ExperimentResult:

    config: ExperimentConfig
    rows: pd.DataFrame
    # m -> queries skipped after max_resample draws
    skipped: dict[int, int] = field(default_factory=dict)

    def queries(self, m: int) -> int:
        return int((self.rows[RowCol.M] == m).sum())

    def misses(self, m: int) -> int:
        df = self.rows[self.rows[RowCol.M] == m]
        return int((~df[RowCol.HIT].astype(bool)).sum())

    def missing_rate_fixed(self, m: int) -> Optional[int]:
        """m = 1 is never searched and always misses. None when no query of m was asked"""
        if m == 1:
            return SCALE
        n = self.queries(m)
        return self.misses(m) * SCALE // n if n else None

    def missing_rate(self, m: int) -> Optional[float]:
        if m == 1:
            return 1.0
        n = self.queries(m)
        return self.misses(m) / n if n else None

    def hit_scores(self, m: int) -> list[int]:
        df = self.rows[(self.rows[RowCol.M] == m) & self.rows[RowCol.HIT].astype(bool)]
        return [int(x) for x in df[RowCol.NORMALIZED_SCORE]]

    def mean_normalized_score(self, m: int) -> Optional[float]:
        scores = self.hit_scores(m)
        return sum(scores) / len(scores) / SCALE if scores else None

    def histogram(self, m: int) -> np.ndarray:
        """Counts of hit normalized scores over equal-width bins of [0, 1]"""
        bins = self.config.histogram_bins
        scores = np.array(self.hit_scores(m), dtype=np.int64)
        idx = np.clip(scores * bins // SCALE, 0, bins - 1)
        return np.bincount(idx, minlength=bins)

    def missing_rate_table(self) -> pd.DataFrame:
        ms = list(self.config.m_values)
        return pd.DataFrame({
            'm': ms,
            'queries': [self.queries(m) for m in ms],
            'misses': [self.misses(m) for m in ms],
            'missing_rate': [_format_rate(self.missing_rate_fixed(m)) for m in ms],
        })

    def to_dict(self) -> dict:
        bins = self.config.histogram_bins
        ret = {'config': self.config.to_dict(), 'by_m': []}
        for m in self.config.m_values:
            scores = self.hit_scores(m)
            rate = self.missing_rate_fixed(m)
            ret['by_m'].append({
                'm': m,
                'queries': self.queries(m),
                'misses': self.misses(m),
                'skipped': self.skipped.get(m, 0),
                'missing_rate': None if rate is None else format_fixed(rate),
                'mean_normalized_score': format_fixed(sum(scores) // len(scores)) if scores else None,
                'histogram': {
                    'bin_edges': [format_fixed(k * SCALE // bins) for k in range(bins + 1)],
                    'counts': [int(x) for x in self.histogram(m)],
                },
            })
        return ret

    def write(self, out_dir: str | Path):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        bins = self.config.histogram_bins

        self.missing_rate_table().to_csv(out / 'missing_rate.csv', index=False, lineterminator='\n')

        for m in self.config.m_values:
            df = self.rows[self.rows[RowCol.M] == m]
            scores = pd.DataFrame({
                'query_id': df[RowCol.QUERY_ID].to_list(),
                'normalized_score': ['' if pd.isna(x) else format_fixed(int(x)) for x in df[RowCol.NORMALIZED_SCORE]],
                'recovered': [bool(x) for x in df[RowCol.RECOVERED]],
            })
            scores.to_csv(out / f'scores_m{m}.csv', index=False, lineterminator='\n')

            hist = pd.DataFrame({
                'bin_lo': [format_fixed(k * SCALE // bins) for k in range(bins)],
                'bin_hi': [format_fixed((k + 1) * SCALE // bins) for k in range(bins)],
                'count': self.histogram(m),
            })
            hist.to_csv(out / f'histogram_m{m}.csv', index=False, lineterminator='\n')

        with open(out / 'result.json', 'w', encoding='utf-8', newline='\n') as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write('\n')

        logger.info('Experiment results written to %s', out)


class _Balances:
    """Common-unit balance of any (currency, address) in a snapshot, 0 when pruned"""

    def __init__(self, snapshot: Snapshot):
        self._lookup = {db.currency_id: {acc.address: acc.balance for acc in db.accounts}
                        for db in snapshot.dbs}

    def get(self, currency_id: int, address: int) -> int:
        return self._lookup[currency_id].get(address, 0)


class ExperimentRunner:

    def __init__(self, config: ExperimentConfig, log: Optional[SimulationLog] = None):
        self.config = config
        self._log = log
        self._rng = np.random.default_rng(config.seed)

    def _draw(self, m: int, users: list[UserAccounts], balances: _Balances
              ) -> Optional[tuple[UserAccounts, tuple[int, ...], dict[int, int]]]:
        ids = np.array(self.config.sim.currency_ids, dtype=np.int64)
        for _ in range(self.config.max_resample + 1):
            user = users[int(self._rng.integers(0, len(users)))]
            subset = tuple(sorted(int(x) for x in self._rng.choice(ids, size=m, replace=False)))
            held = {cid: balances.get(cid, user.address(cid)) for cid in subset}
            # dust whose share floors to a zero alpha would drop out of the search
            total = sum(held.values())
            if total > 0 and all(fx_div(b, total) > 0 for b in held.values()):
                return user, subset, held
        return None

    def _portfolio(self, held: dict[int, int]) -> Portfolio:
        noise = self.config.portfolio_noise
        if noise == 0:
            return Portfolio.from_balances(held)

        noisy = {}
        for cid, b in held.items():
            u = int(self._rng.integers(-noise, noise + 1))
            noisy[cid] = max(fx_mul(b, SCALE + u), 1)
        return Portfolio.from_balances(noisy)

    def _query(self, snapshot: Snapshot, outcome: QueryOutcome, user: UserAccounts, held: dict[int, int]):
        m = outcome.m
        portfolio = self._portfolio(held)
        if m == 1:
            # a single ratio P = {1} matches every account alike
            return

        sub = snapshot.subset(outcome.currencies)
        # a noisy alpha may still floor to zero, the threshold follows the searched m
        searched = len(portfolio.active_currencies)
        params = FinderParams(score_threshold=self.config.threshold_for(m) * searched // m, max_answers=1)
        result = find_accounts(sub, portfolio, params)
        if result.best is None:
            return

        outcome.hit = True
        outcome.normalized_score = result.best.normalized_score
        outcome.recovered = all(result.best.address_of(cid) == user.address(cid)
                                for cid in result.searched_currencies)

        if self.config.oracle_check:
            try:
                oracle = exhaustive_best(sub, portfolio)
            except OracleLimitError as e:
                logger.debug('Query %d (m=%d) skipped by the oracle: %s', outcome.query_id, m, e)
                return
            outcome.oracle_agrees = oracle.best is not None and oracle.best.score == result.best.score
            if not outcome.oracle_agrees:
                explain_gap(sub, portfolio, result, oracle)

    def run(self) -> ExperimentResult:
        cfg = self.config
        log = self._log if self._log is not None else simulate(cfg.sim)
        snapshot = replay(log, cfg.time)

        users = [u for u in log.users if len(u.accounts) == cfg.sim.m]
        balances = _Balances(snapshot)
        logger.info('Experiment on %d users at turn %d, m in %s, %d queries each',
                    len(users), cfg.time, cfg.m_values, cfg.queries_per_m)

        outcomes: list[QueryOutcome] = []
        skipped: dict[int, int] = {}
        total = len(cfg.m_values) * cfg.queries_per_m
        with tqdm(total=total, desc='Running queries') as pbar:
            for m in cfg.m_values:
                skipped[m] = 0
                for q in range(cfg.queries_per_m):
                    pbar.update(1)
                    drawn = self._draw(m, users, balances)
                    if drawn is None:
                        skipped[m] += 1
                        logger.warning('Query %d (m=%d) skipped: no funded user drawn in %d attempts',
                                       q, m, cfg.max_resample + 1)
                        continue

                    user, subset, held = drawn
                    outcome = QueryOutcome(m=m, query_id=q, user_id=user.user_id, currencies=subset)
                    self._query(snapshot, outcome, user, held)
                    outcomes.append(outcome)

        rows = pd.DataFrame([o.to_row() for o in outcomes], columns=RowCol.to_list())
        rows[RowCol.NORMALIZED_SCORE] = rows[RowCol.NORMALIZED_SCORE].astype('Int64')
        rows[RowCol.ORACLE_AGREES] = rows[RowCol.ORACLE_AGREES].astype('boolean')

        result = ExperimentResult(config=cfg, rows=rows, skipped=skipped)
        self._report(result)
        return result

    def _report(self, result: ExperimentResult):
        table = []
        for m in self.config.m_values:
            mean = result.mean_normalized_score(m)
            table.append([m, result.queries(m), result.misses(m), result.skipped.get(m, 0),
                          _format_rate(result.missing_rate_fixed(m)),
                          '-' if mean is None else f'{mean:.4f}'])
        logger.info('The summary is as below:\n%s', tabulate(
            table, headers=['m', 'Queries', 'Misses', 'Skipped', 'Missing rate', 'Mean norm. score']))


def run_experiment(config: ExperimentConfig, log: Optional[SimulationLog] = None) -> ExperimentResult:
    """Simulate once (unless a log is given), replay at config.time and run every query"""
    return ExperimentRunner(config, log=log).run()
