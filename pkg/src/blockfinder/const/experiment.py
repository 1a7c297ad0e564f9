import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from blockfinder.const.defaults import ExperimentDefaults, SCALE, UINT64_MAX
from blockfinder.const.sim import SimConfig
from blockfinder.exceptions import InvalidConfigError
from blockfinder.utils import to_fixed, format_fixed


@dataclass(kw_only=True)
class ExperimentConfig:

    sim: SimConfig
    m_values: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    queries_per_m: int = 200
    # None means "at the end of the simulation"
    snapshot_time: Optional[int] = None
    # Absolute S_t, used unless normalized_threshold is set
    threshold: int = 0
    # S_t expressed as a fraction of m, so one value serves the whole sweep
    normalized_threshold: Optional[int] = None
    seed: int = 0

    portfolio_noise: int = 0
    max_resample: int = ExperimentDefaults.MAX_RESAMPLE
    histogram_bins: int = ExperimentDefaults.HISTOGRAM_BINS
    oracle_check: bool = False

    def __post_init__(self):
        n_currencies = self.sim.m
        if not self.m_values:
            raise InvalidConfigError('m_values should not be empty')
        for m in self.m_values:
            if not 1 <= m <= n_currencies:
                raise InvalidConfigError(f'm = {m} is outside [1, {n_currencies}]')
        if self.queries_per_m < 1:
            raise InvalidConfigError('queries_per_m should be >= 1')
        if self.snapshot_time is not None and not 0 <= self.snapshot_time <= self.sim.turns:
            raise InvalidConfigError(
                f'snapshot_time {self.snapshot_time} is outside [0, {self.sim.turns}]')
        if self.normalized_threshold is None:
            too_strict = [m for m in self.m_values if m > 1 and self.threshold > m * SCALE]
            if too_strict:
                raise InvalidConfigError(
                    f'threshold {format_fixed(self.threshold)} can never be met for m in {too_strict}')
        if self.portfolio_noise < 0:
            raise InvalidConfigError('portfolio_noise should be >= 0')
        if self.max_resample < 0 or self.histogram_bins < 1:
            raise InvalidConfigError('max_resample should be >= 0 and histogram_bins >= 1')
        if not 0 <= self.seed <= UINT64_MAX:
            raise InvalidConfigError(f'seed should be a 64-bit unsigned integer, got {self.seed}')

    @property
    def time(self) -> int:
        return self.sim.turns if self.snapshot_time is None else self.snapshot_time

    def threshold_for(self, m: int) -> int:
        if self.normalized_threshold is not None:
            return self.normalized_threshold * m
        return self.threshold

    @classmethod
    def from_dict(cls, dct: dict[str, Any]) -> 'ExperimentConfig':
        kwargs: dict[str, Any] = {'sim': SimConfig.from_dict(dct['sim'])}

        for name in ('queries_per_m', 'snapshot_time', 'seed', 'max_resample', 'histogram_bins'):
            if dct.get(name) is not None:
                kwargs[name] = int(dct[name])
        if 'm_values' in dct:
            kwargs['m_values'] = [int(x) for x in dct['m_values']]
        for name in ('threshold', 'normalized_threshold', 'portfolio_noise'):
            if dct.get(name) is not None:
                kwargs[name] = to_fixed(dct[name], name)
        if 'oracle_check' in dct:
            kwargs['oracle_check'] = bool(dct['oracle_check'])

        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        return {
            'sim': self.sim.to_dict(),
            'm_values': list(self.m_values),
            'queries_per_m': self.queries_per_m,
            'snapshot_time': self.snapshot_time,
            'threshold': format_fixed(self.threshold),
            'normalized_threshold': (None if self.normalized_threshold is None
                                     else format_fixed(self.normalized_threshold)),
            'seed': self.seed,
            'portfolio_noise': format_fixed(self.portfolio_noise),
            'max_resample': self.max_resample,
            'histogram_bins': self.histogram_bins,
            'oracle_check': self.oracle_check,
        }

    @classmethod
    def load(cls, path: str | Path) -> 'ExperimentConfig':
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_dict(json.load(f))
