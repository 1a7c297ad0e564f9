import json
from pathlib import Path
from typing import Mapping, Optional

import numpy as np
import pandas as pd

from blockfinder.const.defaults import MINT_ADDRESS, ONE
from blockfinder.const.records import RecordCol
from blockfinder.exceptions import CorruptLogError, UnknownCurrencyError
from blockfinder.ledger.sim_log import SimulationLog
from blockfinder.logger import MyLogger
from blockfinder.utils import check_range, format_fixed, fx_mul, to_fixed

from .snapshot import AccountBalance, CurrencyDb, Snapshot

logger = MyLogger('snapshot')

_ORDER = 'order'
_ACCOUNT = 'account'
_DELTA = 'delta'


def convert_common(balance: int, rate: int) -> int:
    """Native fixed-point balance to common-currency units"""
    if rate <= 0:
        raise ValueError(f'Exchange rate should be > 0, got {format_fixed(rate)}')
    return check_range(fx_mul(balance, rate), 'Converted balance')


def read_rates(path: str | Path) -> dict[int, int]:
    with open(path, 'r', encoding='utf-8') as f:
        payload = json.load(f)
    return {int(k): to_fixed(v, f'rate of currency {k}') for k, v in payload['rates'].items()}


def _resolve_rates(log: SimulationLog, rates: Optional[Mapping[int, int]]) -> dict[int, int]:
    if rates is not None:
        return dict(rates)
    if log.config is not None:
        return log.config.exchange_rates
    return {cid: ONE for cid in log.currency_ids}


def _balance_deltas(df: pd.DataFrame) -> pd.DataFrame:
    """One row per balance change: credit of every record, debit of every transfer
    (amount + fee) and the fee payout of each (turn, currency) block to the
    destination of the block's final record
    """
    order = np.arange(len(df), dtype=np.int64)
    cur = df[RecordCol.CURRENCY].to_numpy()
    src = df[RecordCol.SRC].to_numpy()
    dst = df[RecordCol.DST].to_numpy()
    amount = df[RecordCol.AMOUNT].to_numpy()
    fee = df[RecordCol.FEE].to_numpy()

    is_mint = src == MINT_ADDRESS
    if (dst == MINT_ADDRESS).any():
        raise CorruptLogError('A record sends value to the MINT sentinel')
    if ((src == dst) & ~is_mint).any():
        raise CorruptLogError('A transfer has the same source and destination')
    if (amount < 0).any() or (fee < 0).any():
        raise CorruptLogError('Negative amount or fee in log')
    if (fee[is_mint] != 0).any():
        raise CorruptLogError('MINT records should not carry a fee')

    credits = pd.DataFrame({_ORDER: order, RecordCol.CURRENCY: cur, _ACCOUNT: dst, _DELTA: amount})
    transfer = ~is_mint
    debits = pd.DataFrame({_ORDER: order[transfer], RecordCol.CURRENCY: cur[transfer],
                           _ACCOUNT: src[transfer], _DELTA: -(amount[transfer] + fee[transfer])})

    blocks = pd.DataFrame({RecordCol.TURN: df[RecordCol.TURN].to_numpy(), RecordCol.CURRENCY: cur,
                           _ORDER: order, RecordCol.FEE: fee})
    blocks = blocks.groupby([RecordCol.TURN, RecordCol.CURRENCY], sort=False).agg(
        **{_ORDER: (_ORDER, 'max'), RecordCol.FEE: (RecordCol.FEE, 'sum')})
    blocks = blocks[blocks[RecordCol.FEE] > 0]

    last = blocks[_ORDER].to_numpy(dtype=np.int64)
    if (~is_mint[last]).any():
        bad = blocks.index[~is_mint[last]][0]
        raise CorruptLogError(
            f'Fees of turn {bad[0]} currency {bad[1]} have no miner: the block does not end with a MINT record')
    payouts = pd.DataFrame({_ORDER: last, RecordCol.CURRENCY: cur[last],
                            _ACCOUNT: dst[last], _DELTA: blocks[RecordCol.FEE].to_numpy()})

    deltas = pd.concat([credits, debits, payouts], ignore_index=True)
    return deltas.sort_values(_ORDER, kind='stable', ignore_index=True)


def replay(log: SimulationLog | str | Path,
           t: int,
           rates: Optional[Mapping[int, int]] = None) -> Snapshot:
    """Apply every record with turn < t and build the sorted, pruned, common-currency snapshot"""

    if isinstance(log, (str, Path)):
        log = SimulationLog.read_jsonl(log)

    if t < 0 or (log.turns is not None and t > log.turns):
        raise ValueError(f'Snapshot time {t} is outside [0, {log.turns}]')

    _rates = _resolve_rates(log, rates)
    df = log.records[log.records[RecordCol.TURN] < t]

    unknown = set(int(x) for x in df[RecordCol.CURRENCY].unique()) - set(_rates)
    if unknown:
        raise UnknownCurrencyError(f'Log references unknown currencies {sorted(unknown)}')

    deltas = _balance_deltas(df)
    keys = [RecordCol.CURRENCY, _ACCOUNT]

    running = deltas.groupby(keys, sort=False)[_DELTA].cumsum()
    if (running < 0).any():
        row = deltas.loc[running.idxmin()]
        raise CorruptLogError(
            f'Balance of address {row[_ACCOUNT]} in currency {row[RecordCol.CURRENCY]} goes negative')

    final = deltas.groupby(keys)[_DELTA].sum()
    final = final[final > 0]

    per_currency: dict[int, list[AccountBalance]] = {cid: [] for cid in _rates}
    for (cid, address), native in final.items():
        common = convert_common(int(native), _rates[int(cid)])
        if common > 0:
            per_currency[int(cid)].append(AccountBalance(int(address), common))

    snapshot = Snapshot.from_dbs(
        t, [CurrencyDb.from_unsorted(cid, accounts) for cid, accounts in sorted(per_currency.items())])

    logger.info('Replayed %d records up to turn %d: %s', len(df), t,
                ', '.join(f'C{db.currency_id}={len(db)}' for db in snapshot.dbs))
    return snapshot
