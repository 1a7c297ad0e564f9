"""Turn-based simulation of m independent cryptocurrencies sharing one population of users.

Each turn: new users join (one account in every currency, funded by a MINT
endowment), every funded account sends a random share of its balance to a
random other account, and a random account mines the turn, collecting the
block reward and every fee paid during the turn.
"""

from array import array
from typing import Callable, Optional

import numpy as np
import pandas as pd
from tabulate import tabulate

from blockfinder.const.defaults import MINT_ADDRESS, SCALE
from blockfinder.const.records import RecordCol
from blockfinder.const.sim import CurrencyConfig, SimConfig
from blockfinder.exceptions import EmptyWorldError, InvalidConfigError
from blockfinder.logger import MyLogger
from blockfinder.utils import check_range, format_fixed, fx_div, fx_mul

from .sim_log import SimulationLog, UserAccounts

logger = MyLogger('ledger-sim')

# (rng, size) -> int64 array of fixed-point fractions strictly inside (0, 1)
FractionSampler = Callable[[np.random.Generator, int], np.ndarray]


def uniform_fractions(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.integers(1, SCALE, size=size, dtype=np.int64)


def new_users_at(config: CurrencyConfig, t: int) -> int:
    """floor(beta1 * t + beta0)"""
    if t < 0:
        raise ValueError(f't should be >= 0, got {t}')
    return (config.beta1 * t + config.beta0) // SCALE


class _CurrencyState:

    def __init__(self, config: CurrencyConfig):
        self.config = config
        # balances[address - 1]
        self.balances: list[int] = []
        self.minted: int = 0
        self.fees_paid: int = 0

    @property
    def n_accounts(self) -> int:
        return len(self.balances)

    def open_account(self) -> int:
        self.balances.append(0)
        return len(self.balances)

    def mint(self, value: int):
        self.minted = check_range(
            self.minted + value, f'Total supply of currency {self.config.currency_id}')


class LedgerSimulator:

    def __init__(self, config: SimConfig, fraction_sampler: Optional[FractionSampler] = None):
        self.config = config
        self.fraction_sampler: FractionSampler = fraction_sampler or uniform_fractions

        self._rng = np.random.default_rng(config.seed)
        self._states: dict[int, _CurrencyState] = {
            c.currency_id: _CurrencyState(c) for c in config.currencies}
        self._users: list[UserAccounts] = []
        self._cols: dict[str, array] = {col: array('q') for col in RecordCol.to_list()}

    def _emit(self, turn: int, currency_id: int, src: int, dst: int, amount: int, fee: int):
        self._cols[RecordCol.TURN].append(turn)
        self._cols[RecordCol.CURRENCY].append(currency_id)
        self._cols[RecordCol.SRC].append(src)
        self._cols[RecordCol.DST].append(dst)
        self._cols[RecordCol.AMOUNT].append(amount)
        self._cols[RecordCol.FEE].append(fee)

    def n_new_users(self, t: int) -> int:
        ret = sum(new_users_at(c, t) for c in self.config.currencies)
        if t == 0:
            ret += sum(c.initial_users for c in self.config.currencies)
        return ret

    def run(self) -> SimulationLog:
        logger.info('Simulating %d currencies over %d turns (seed %d)',
                    self.config.m, self.config.turns, self.config.seed)

        for t in range(self.config.turns):
            n_new = self.n_new_users(t)
            if t == 0 and n_new == 0:
                raise EmptyWorldError(
                    'No user exists at turn 0: raise beta0 or pre-seed users with initial_users')

            first_uid = len(self._users)
            self._users.extend(UserAccounts(user_id=uid) for uid in range(first_uid, first_uid + n_new))

            for currency_id, state in self._states.items():
                self._run_turn(t, state, first_uid, n_new)

            logger.debug('Turn %d done, %d users in total', t, len(self._users))

        records = pd.DataFrame({
            col: np.frombuffer(arr, dtype=np.int64).copy() if len(arr) else np.zeros(0, dtype=np.int64)
            for col, arr in self._cols.items()
        })
        self._report(len(records))

        return SimulationLog(records, config=self.config, users=self._users)

    def _run_turn(self, t: int, state: _CurrencyState, first_uid: int, n_new: int):
        cfg = state.config
        cid = cfg.currency_id

        # Step 1 - new accounts, addresses handed out in a per-currency random order
        for k in self._rng.permutation(n_new).tolist():
            address = state.open_account()
            self._users[first_uid + k].accounts[cid] = address
            state.balances[address - 1] = cfg.initial_endowment
            state.mint(cfg.initial_endowment)
            self._emit(t, cid, MINT_ADDRESS, address, cfg.initial_endowment, 0)

        n = state.n_accounts
        if n == 0:
            return

        # Step 2 - transfers, needs a counterparty
        fees = 0
        if n >= 2:
            fees = self._run_transfers(t, state)

        # Step 3 - the miner takes the reward and this turn's fees
        miner = int(self._rng.integers(0, n))
        state.balances[miner] += cfg.miner_reward + fees
        state.mint(cfg.miner_reward)
        self._emit(t, cid, MINT_ADDRESS, miner + 1, cfg.miner_reward, 0)

    def _run_transfers(self, t: int, state: _CurrencyState) -> int:
        cfg = state.config
        cid = cfg.currency_id
        rate = cfg.miner_fee_rate
        balances = state.balances
        n = len(balances)
        k_per_user = self.config.transactions_per_user_per_turn
        n_slots = n * k_per_user

        fracs_arr = np.asarray(self.fraction_sampler(self._rng, n_slots), dtype=np.int64)
        if fracs_arr.shape != (n_slots,) or (n_slots and (fracs_arr.min() <= 0 or fracs_arr.max() >= SCALE)):
            raise InvalidConfigError('Fraction sampler should return `size` fractions strictly inside (0, 1)')
        fracs = fracs_arr.tolist()
        # draw among the n - 1 others, shifted past the sender below
        dsts = self._rng.integers(0, n - 1, size=n_slots).tolist()

        fees = 0
        emit = self._emit
        for i in range(n):
            for j in range(k_per_user):
                bal = balances[i]
                if bal <= 0:
                    break

                slot = i * k_per_user + j
                amount = fx_mul(bal, fracs[slot])
                fee = fx_mul(amount, rate)
                if amount + fee > bal:
                    amount = fx_div(bal, SCALE + rate)
                    fee = fx_mul(amount, rate)

                d = dsts[slot]
                if d >= i:
                    d += 1

                balances[i] = bal - amount - fee
                balances[d] += amount
                fees += fee
                emit(t, cid, i + 1, d + 1, amount, fee)

        state.fees_paid += fees
        return fees

    def _report(self, n_records: int):
        rows = [[cid, s.n_accounts, format_fixed(s.minted), format_fixed(s.fees_paid)]
                for cid, s in self._states.items()]
        logger.info('Simulation finished: %d users, %d records\n%s',
                    len(self._users), n_records,
                    tabulate(rows, headers=['Currency', 'Accounts', 'Minted', 'Fees']))


def simulate(config: SimConfig, fraction_sampler: Optional[FractionSampler] = None) -> SimulationLog:
    return LedgerSimulator(config, fraction_sampler=fraction_sampler).run()
