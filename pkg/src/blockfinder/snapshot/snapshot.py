import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from blockfinder.exceptions import CorruptLogError, UnknownCurrencyError
from blockfinder.utils import format_fixed, to_fixed


@dataclass(frozen=True)
class AccountBalance:
    address: int
    balance: int  # common-currency units, fixed-point

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.balance, self.address)


@dataclass
class CurrencyDb:
    """Non-zero accounts of one currency sorted by (balance, address)"""

    currency_id: int
    accounts: list[AccountBalance] = field(default_factory=list)
    # Parallel to accounts, kept for bisect
    balances: list[int] = field(init=False, repr=False)

    def __post_init__(self):
        self.balances = [a.balance for a in self.accounts]

        seen: set[int] = set()
        prev = None
        for acc in self.accounts:
            if acc.balance <= 0:
                raise CorruptLogError(
                    f'Currency {self.currency_id}: account {acc.address} has non-positive balance')
            if acc.address in seen:
                raise CorruptLogError(f'Currency {self.currency_id}: duplicate address {acc.address}')
            if prev is not None and acc.sort_key <= prev:
                raise CorruptLogError(f'Currency {self.currency_id}: accounts are not sorted by (balance, address)')
            seen.add(acc.address)
            prev = acc.sort_key

    @classmethod
    def from_unsorted(cls, currency_id: int, accounts: Iterable[AccountBalance]) -> 'CurrencyDb':
        return cls(currency_id, sorted(accounts, key=lambda a: a.sort_key))

    def __len__(self) -> int:
        return len(self.accounts)

    def to_dict(self) -> dict:
        return {
            'currency': self.currency_id,
            'accounts': [[a.address, format_fixed(a.balance)] for a in self.accounts],
        }

    @classmethod
    def from_dict(cls, dct: dict) -> 'CurrencyDb':
        return cls(int(dct['currency']),
                   [AccountBalance(int(addr), to_fixed(bal, 'balance')) for addr, bal in dct['accounts']])


def _db_order(db: CurrencyDb) -> tuple[int, int]:
    return (len(db), db.currency_id)


@dataclass
class Snapshot:
    """Balances of every currency at time t, smallest database first"""

    time: int
    dbs: list[CurrencyDb]

    def __post_init__(self):
        ids = [db.currency_id for db in self.dbs]
        if len(set(ids)) != len(ids):
            raise CorruptLogError(f'Duplicate currency in snapshot: {ids}')
        if [_db_order(db) for db in self.dbs] != sorted(_db_order(db) for db in self.dbs):
            raise CorruptLogError('Snapshot dbs should be ordered by (number of accounts, currency_id)')

    @classmethod
    def from_dbs(cls, time: int, dbs: Iterable[CurrencyDb]) -> 'Snapshot':
        return cls(time, sorted(dbs, key=_db_order))

    @property
    def m(self) -> int:
        return len(self.dbs)

    @property
    def currency_ids(self) -> list[int]:
        return sorted(db.currency_id for db in self.dbs)

    def db(self, currency_id: int) -> CurrencyDb:
        for db in self.dbs:
            if db.currency_id == currency_id:
                return db
        raise UnknownCurrencyError(f'Currency {currency_id} is not in the snapshot')

    def subset(self, currency_ids: Iterable[int]) -> 'Snapshot':
        return Snapshot.from_dbs(self.time, [self.db(cid) for cid in currency_ids])

    def total_accounts(self) -> int:
        return sum(len(db) for db in self.dbs)

    # -------------------------------------------------
    def to_dict(self) -> dict:
        return {'time': self.time, 'dbs': [db.to_dict() for db in self.dbs]}

    @classmethod
    def from_dict(cls, dct: dict) -> 'Snapshot':
        return cls(int(dct['time']), [CurrencyDb.from_dict(x) for x in dct['dbs']])

    def save(self, path: str | Path):
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(self.to_dict(), f, separators=(',', ':'))
            f.write('\n')

    @classmethod
    def load(cls, path: str | Path) -> 'Snapshot':
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))
