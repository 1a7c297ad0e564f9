import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
import pandas as pd

from blockfinder.const.defaults import MINT_ADDRESS, MINT_LABEL
from blockfinder.const.records import RecordCol
from blockfinder.const.sim import SimConfig
from blockfinder.exceptions import CorruptLogError
from blockfinder.logger import MyLogger
from blockfinder.utils import format_fixed, to_fixed

logger = MyLogger('sim-log')


@dataclass(frozen=True)
class AccountId:
    currency_id: int
    address: int


@dataclass(frozen=True, kw_only=True)
class TransactionRecord:

    turn: int
    currency_id: int
    src: int  # MINT_ADDRESS for value creation
    dst: int
    amount: int
    fee: int = 0

    @property
    def is_mint(self) -> bool:
        return self.src == MINT_ADDRESS

    @property
    def source(self) -> Optional[AccountId]:
        return None if self.is_mint else AccountId(self.currency_id, self.src)

    @property
    def destination(self) -> AccountId:
        return AccountId(self.currency_id, self.dst)

    def to_json_dict(self) -> dict:
        return {
            'turn': self.turn,
            'currency': self.currency_id,
            'src': MINT_LABEL if self.is_mint else self.src,
            'dst': self.dst,
            'amount': format_fixed(self.amount),
            'fee': format_fixed(self.fee),
        }

    @classmethod
    def from_json_dict(cls, dct: dict) -> 'TransactionRecord':
        src = dct['src']
        return cls(
            turn=int(dct['turn']),
            currency_id=int(dct['currency']),
            src=MINT_ADDRESS if src == MINT_LABEL else _address(src, 'source'),
            dst=_address(dct['dst'], 'destination'),
            amount=to_fixed(dct['amount'], 'amount'),
            fee=to_fixed(dct['fee'], 'fee'),
        )


def _address(value, what: str) -> int:
    # bool is an int subclass
    if isinstance(value, bool) or not isinstance(value, int) or value <= MINT_ADDRESS:
        raise CorruptLogError(f'Invalid {what} {value!r}')
    return value


@dataclass
class UserAccounts:
    """Ground truth: the one account a user holds in every currency"""

    user_id: int
    accounts: dict[int, int] = field(default_factory=dict)

    def address(self, currency_id: int) -> int:
        return self.accounts[currency_id]


def empty_records() -> pd.DataFrame:
    return pd.DataFrame({col: np.zeros(0, dtype=np.int64) for col in RecordCol.to_list()})


@dataclass
class SimulationLog:
    """Ordered transaction records plus (optionally) the config and ground truth that produced them.
    Records are an int64 DataFrame with the RecordCol columns, src == 0 marks MINT
    """

    records: pd.DataFrame
    config: Optional[SimConfig] = None
    users: list[UserAccounts] = field(default_factory=list)

    def __post_init__(self):
        missing = set(RecordCol.to_list()) - set(self.records.columns)
        if missing:
            raise CorruptLogError(f'Records are missing columns: {", ".join(sorted(missing))}')
        self.records = self.records[RecordCol.to_list()].reset_index(drop=True)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def turns(self) -> Optional[int]:
        """Number of simulated turns, unknown for a log read from a bare file"""
        return self.config.turns if self.config is not None else None

    @property
    def currency_ids(self) -> list[int]:
        if self.config is not None:
            return self.config.currency_ids
        return sorted(int(x) for x in self.records[RecordCol.CURRENCY].unique())

    def iter_records(self) -> Iterator[TransactionRecord]:
        for turn, cur, src, dst, amount, fee in self.records.itertuples(index=False, name=None):
            yield TransactionRecord(turn=int(turn), currency_id=int(cur), src=int(src),
                                    dst=int(dst), amount=int(amount), fee=int(fee))

    def truncated(self, t: int) -> 'SimulationLog':
        mask = self.records[RecordCol.TURN] < t
        return SimulationLog(self.records[mask].copy(), config=self.config, users=self.users)

    def mint_total(self, currency_id: int, upto: Optional[int] = None) -> int:
        """Value created in a currency by turns < upto (all turns if upto is None)"""
        df = self.records
        mask = (df[RecordCol.CURRENCY] == currency_id) & (df[RecordCol.SRC] == MINT_ADDRESS)
        if upto is not None:
            mask &= df[RecordCol.TURN] < upto
        return sum(int(x) for x in df.loc[mask, RecordCol.AMOUNT])

    # -------------------------------------------------
    # Line-delimited JSON log

    def write_jsonl(self, path: str | Path):
        logger.info('Writing %d records to %s', len(self), path)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            for rec in self.iter_records():
                f.write(json.dumps(rec.to_json_dict()))
                f.write('\n')

    @classmethod
    def read_jsonl(cls, path: str | Path, config: Optional[SimConfig] = None) -> 'SimulationLog':
        columns: dict[str, list[int]] = {col: [] for col in RecordCol.to_list()}

        with open(path, 'r', encoding='utf-8') as f:
            for lineno, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    rec = TransactionRecord.from_json_dict(json.loads(line))
                except (KeyError, TypeError, ValueError) as e:
                    raise CorruptLogError(f'{path}:{lineno}: {e}') from e

                columns[RecordCol.TURN].append(rec.turn)
                columns[RecordCol.CURRENCY].append(rec.currency_id)
                columns[RecordCol.SRC].append(rec.src)
                columns[RecordCol.DST].append(rec.dst)
                columns[RecordCol.AMOUNT].append(rec.amount)
                columns[RecordCol.FEE].append(rec.fee)

        records = pd.DataFrame({k: np.asarray(v, dtype=np.int64) for k, v in columns.items()})
        logger.info('Read %d records from %s', len(records), path)
        return cls(records, config=config)

    # -------------------------------------------------
    # Ground truth

    def write_ground_truth(self, path: str | Path):
        payload = {
            'users': [
                {'user_id': u.user_id,
                 'accounts': {str(k): v for k, v in sorted(u.accounts.items())}}
                for u in self.users
            ]
        }
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(payload, f, indent=1)
            f.write('\n')

    @staticmethod
    def read_ground_truth(path: str | Path) -> list[UserAccounts]:
        with open(path, 'r', encoding='utf-8') as f:
            payload = json.load(f)
        return [UserAccounts(user_id=int(u['user_id']),
                             accounts={int(k): int(v) for k, v in u['accounts'].items()})
                for u in payload['users']]
