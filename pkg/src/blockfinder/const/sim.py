import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from blockfinder.const.defaults import ONE, UINT64_MAX
from blockfinder.exceptions import InvalidConfigError
from blockfinder.utils import FixedInput, to_fixed, format_fixed


@dataclass(kw_only=True)
class CurrencyConfig:
    """One simulated cryptocurrency. Rational fields are fixed-point ints,
    build from human values with `CurrencyConfig.from_dict`
    """

    currency_id: int
    beta1: int = 0
    beta0: int = 0
    miner_fee_rate: int = 0
    miner_reward: int = 0
    initial_endowment: int = ONE
    exchange_rate: int = ONE
    initial_users: int = 0

    def __post_init__(self):
        if self.currency_id < 1:
            raise InvalidConfigError(f'currency_id should be >= 1, got {self.currency_id}')
        if self.beta1 < 0 or self.beta0 < 0:
            raise InvalidConfigError(f'Currency {self.currency_id}: beta1 / beta0 should be >= 0')
        if not 0 <= self.miner_fee_rate <= ONE:
            raise InvalidConfigError(
                f'Currency {self.currency_id}: miner_fee_rate should be in [0, 1],'
                f' got {format_fixed(self.miner_fee_rate)}')
        if self.miner_reward < 0:
            raise InvalidConfigError(f'Currency {self.currency_id}: miner_reward should be >= 0')
        if self.initial_endowment <= 0:
            raise InvalidConfigError(f'Currency {self.currency_id}: initial_endowment should be > 0')
        if self.exchange_rate <= 0:
            raise InvalidConfigError(f'Currency {self.currency_id}: exchange_rate should be > 0')
        if self.initial_users < 0:
            raise InvalidConfigError(f'Currency {self.currency_id}: initial_users should be >= 0')
        if self.beta1 == 0 and self.beta0 == 0 and self.initial_users == 0:
            raise InvalidConfigError(
                f'Currency {self.currency_id} never acquires users: beta1 = beta0 = 0 without pre-seeded users')

    _RATIONAL_FIELDS = ('beta1', 'beta0', 'miner_fee_rate', 'miner_reward',
                        'initial_endowment', 'exchange_rate')

    @classmethod
    def from_dict(cls, dct: dict[str, Any]) -> 'CurrencyConfig':
        unknown = set(dct) - {'currency_id', 'initial_users', *cls._RATIONAL_FIELDS}
        if unknown:
            raise InvalidConfigError(f'Unknown currency fields: {", ".join(sorted(unknown))}')

        kwargs: dict[str, Any] = {
            'currency_id': int(dct['currency_id']),
            'initial_users': int(dct.get('initial_users', 0)),
        }
        for name in cls._RATIONAL_FIELDS:
            if name in dct:
                kwargs[name] = to_fixed(dct[name], name)
        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        ret: dict[str, Any] = {'currency_id': self.currency_id}
        for name in self._RATIONAL_FIELDS:
            ret[name] = format_fixed(getattr(self, name))
        ret['initial_users'] = self.initial_users
        return ret


@dataclass(kw_only=True)
class SimConfig:

    currencies: list[CurrencyConfig]
    turns: int
    transactions_per_user_per_turn: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.currencies:
            raise InvalidConfigError('At least one currency is required')
        if self.turns < 1:
            raise InvalidConfigError(f'turns should be >= 1, got {self.turns}')
        if self.transactions_per_user_per_turn < 1:
            raise InvalidConfigError('transactions_per_user_per_turn should be >= 1')
        if not 0 <= self.seed <= UINT64_MAX:
            raise InvalidConfigError(f'seed should be a 64-bit unsigned integer, got {self.seed}')

        ids = sorted(c.currency_id for c in self.currencies)
        if ids != list(range(1, len(ids) + 1)):
            raise InvalidConfigError(f'currency_ids should be distinct and dense in [1..m], got {ids}')

        # Keep a canonical order so iteration never depends on the input order
        self.currencies = sorted(self.currencies, key=lambda c: c.currency_id)

    @property
    def m(self) -> int:
        return len(self.currencies)

    @property
    def currency_ids(self) -> list[int]:
        return [c.currency_id for c in self.currencies]

    def currency(self, currency_id: int) -> CurrencyConfig:
        return self.currencies[currency_id - 1]

    @property
    def exchange_rates(self) -> dict[int, int]:
        return {c.currency_id: c.exchange_rate for c in self.currencies}

    @classmethod
    def from_dict(cls, dct: dict[str, Any]) -> 'SimConfig':
        try:
            return cls(
                currencies=[CurrencyConfig.from_dict(c) for c in dct['currencies']],
                turns=int(dct['turns']),
                transactions_per_user_per_turn=int(dct.get('transactions_per_user_per_turn', 1)),
                seed=int(dct.get('seed', 0)),
            )
        except KeyError as e:
            raise InvalidConfigError(f'Missing config field {e.args[0]}') from e

    def to_dict(self) -> dict[str, Any]:
        return {
            'currencies': [c.to_dict() for c in self.currencies],
            'turns': self.turns,
            'transactions_per_user_per_turn': self.transactions_per_user_per_turn,
            'seed': self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def load(cls, path: str | Path) -> 'SimConfig':
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))

    def replace(self, **changes) -> 'SimConfig':
        dct = {
            'currencies': list(self.currencies),
            'turns': self.turns,
            'transactions_per_user_per_turn': self.transactions_per_user_per_turn,
            'seed': self.seed,
        }
        dct.update(changes)
        return SimConfig(**dct)


def make_currency(currency_id: int, **values: FixedInput | int) -> CurrencyConfig:
    """Shortcut taking human values, e.g. make_currency(1, beta0=2, miner_fee_rate='0.01')"""
    return CurrencyConfig.from_dict({'currency_id': currency_id, **values})
