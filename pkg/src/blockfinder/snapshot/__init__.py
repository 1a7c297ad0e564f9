from .snapshot import AccountBalance, CurrencyDb, Snapshot
from .replay import replay, convert_common, read_rates
