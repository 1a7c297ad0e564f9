from .sim_log import AccountId, TransactionRecord, UserAccounts, SimulationLog
from .simulator import LedgerSimulator, new_users_at, simulate, uniform_fractions
