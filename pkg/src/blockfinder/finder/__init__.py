from .portfolio import Portfolio
from .score import score, normalized_score, target_balance, target_slack
from .binary_find import binary_find
from .finder import AnswerTuple, FinderParams, FinderResult, find_accounts
