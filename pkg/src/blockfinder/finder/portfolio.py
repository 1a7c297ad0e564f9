import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from blockfinder.const.defaults import ONE
from blockfinder.exceptions import InvalidPortfolioError
from blockfinder.utils import FixedInput, format_fixed, fx_div, to_fixed


@dataclass
class Portfolio:
    """Leaked investment ratios, currency_id -> alpha (fixed-point).

    Alphas must sum to 1 up to one unit in the last place per currency, which is
    what flooring m fractions of a balance tuple can lose
    """

    alphas: dict[int, int]

    def __post_init__(self):
        if not self.alphas:
            raise InvalidPortfolioError('Portfolio should hold at least one currency')
        for cid, alpha in self.alphas.items():
            if not 0 <= alpha <= ONE:
                raise InvalidPortfolioError(f'alpha of currency {cid} should be in [0, 1], got {format_fixed(alpha)}')

        total = sum(self.alphas.values())
        if abs(total - ONE) > len(self.alphas):
            raise InvalidPortfolioError(f'alphas should sum to 1, got {format_fixed(total)}')

        self.alphas = dict(sorted(self.alphas.items()))

    @property
    def m(self) -> int:
        return len(self.alphas)

    @property
    def currency_ids(self) -> list[int]:
        return list(self.alphas)

    def alpha(self, currency_id: int) -> int:
        return self.alphas[currency_id]

    @property
    def active_currencies(self) -> list[int]:
        """Currencies with a non-zero allocation, the only ones a search can use"""
        return [cid for cid, a in self.alphas.items() if a > 0]

    def weights(self, currency_ids: Sequence[int]) -> list[int]:
        return [self.alphas[cid] for cid in currency_ids]

    # -------------------------------------------------
    @classmethod
    def from_list(cls, values: Sequence[FixedInput], currency_ids: Optional[Sequence[int]] = None) -> 'Portfolio':
        ids = list(currency_ids) if currency_ids is not None else list(range(1, len(values) + 1))
        if len(ids) != len(values):
            raise InvalidPortfolioError('One alpha per currency is required')
        return cls({cid: to_fixed(v, f'alpha of currency {cid}') for cid, v in zip(ids, values)})

    @classmethod
    def from_balances(cls, balances: Mapping[int, int]) -> 'Portfolio':
        """The exact portfolio of an account tuple: alpha_i = balance_i / sum of balances"""
        total = sum(balances.values())
        if total <= 0:
            raise InvalidPortfolioError('Balances should not all be zero')
        return cls({cid: fx_div(b, total) for cid, b in balances.items()})

    @classmethod
    def from_dict(cls, dct: dict) -> 'Portfolio':
        try:
            return cls({int(k): to_fixed(v, f'alpha of currency {k}') for k, v in dct['alphas'].items()})
        except KeyError as e:
            raise InvalidPortfolioError('Portfolio document needs an "alphas" object') from e

    def to_dict(self) -> dict:
        return {'alphas': {str(k): format_fixed(v) for k, v in self.alphas.items()}}

    @classmethod
    def load(cls, path: str | Path) -> 'Portfolio':
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))

    def save(self, path: str | Path):
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write('\n')
