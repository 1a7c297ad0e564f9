import logging
from typing import Callable, Sequence

import numpy as np
import pytest

from blockfinder.const.defaults import ONE
from blockfinder.const.sim import SimConfig, make_currency
from blockfinder.finder import Portfolio
from blockfinder.logger import MyLogger
from blockfinder.snapshot import AccountBalance, CurrencyDb, Snapshot
from blockfinder.utils import to_fixed


@pytest.fixture(autouse=True)
def _reset_log_handlers():
    yield
    # CLI tests install stdout handlers bound to the captured stream
    for hdlr in list(MyLogger.root_logger.handlers):
        MyLogger.root_logger.removeHandler(hdlr)
    MyLogger.root_logger.setLevel(logging.NOTSET)


@pytest.fixture
def seven_accounts() -> list[AccountBalance]:
    return [AccountBalance(address, to_fixed(bal)) for address, bal in
            [(1, '1.23'), (2, '3.78'), (3, '6.0'), (4, '6.0'), (5, '7.13'), (6, '8.2'), (7, '12.6')]]


@pytest.fixture
def make_snapshot() -> Callable[..., Snapshot]:
    """make_snapshot({1: [(address, balance), ...], 2: [...]}, time=0), balances in human units"""

    def _make(dbs: dict[int, Sequence[tuple[int, object]]], time: int = 0) -> Snapshot:
        return Snapshot.from_dbs(time, [
            CurrencyDb.from_unsorted(cid, [AccountBalance(addr, to_fixed(bal)) for addr, bal in accounts])
            for cid, accounts in dbs.items()])

    return _make


@pytest.fixture
def random_snapshot() -> Callable[..., Snapshot]:
    """Snapshot with m currencies of min_n..max_n accounts, balances log-uniform over [1, 1000]"""

    def _make(rng: np.random.Generator, m: int, max_n: int, min_n: int = 1) -> Snapshot:
        dbs = []
        for cid in range(1, m + 1):
            n = int(rng.integers(min_n, max_n + 1))
            addresses = rng.permutation(np.arange(1, 3 * max_n + 1))[:n]
            balances = np.exp(rng.uniform(0, np.log(1000), size=n)) * ONE
            dbs.append(CurrencyDb.from_unsorted(
                cid, [AccountBalance(int(a), max(int(b), 1)) for a, b in zip(addresses, balances)]))
        return Snapshot.from_dbs(0, dbs)

    return _make


@pytest.fixture
def noisy_portfolio() -> Callable[..., Portfolio]:
    """Portfolio of a random tuple of the snapshot, each balance shaken by up to +-noise.
    interior=True never picks the smallest or largest account of a db
    """

    def _make(rng: np.random.Generator, snapshot: Snapshot, noise: float = 0.2, interior: bool = False) -> Portfolio:
        held = {}
        for db in snapshot.dbs:
            lo, hi = (1, len(db) - 1) if interior and len(db) >= 3 else (0, len(db))
            acc = db.accounts[int(rng.integers(lo, hi))]
            held[db.currency_id] = max(int(acc.balance * (1 + rng.uniform(-noise, noise))), 1)
        return Portfolio.from_balances(held)

    return _make


@pytest.fixture
def two_user_config() -> SimConfig:
    return SimConfig(
        currencies=[make_currency(1, beta0=2, initial_endowment=10)],
        turns=1,
        seed=0)


@pytest.fixture
def small_config() -> SimConfig:
    return SimConfig(
        currencies=[
            make_currency(1, beta1='0.2', beta0=1, miner_fee_rate='0.01', miner_reward=2, initial_users=5),
            make_currency(2, beta1='0.1', beta0='0.5', miner_fee_rate='0.02', miner_reward=1),
            make_currency(3, beta1='0.3', miner_fee_rate='0.005', miner_reward=3, exchange_rate='2.5'),
        ],
        turns=12,
        seed=42)
