"""Errors raised across blockfinder. All derive from ValueError so callers that
only care about "bad input" can keep catching that.
"""


class BlockFinderError(ValueError):
    pass


class InvalidConfigError(BlockFinderError):
    pass


class EmptyWorldError(BlockFinderError):
    """Simulation would have to run a turn without a single account"""


class FixedPointOverflowError(BlockFinderError):
    pass


class UnknownCurrencyError(BlockFinderError):
    pass


class CorruptLogError(BlockFinderError):
    pass


class InvalidCandidateError(BlockFinderError):
    """Candidate tuple whose balances sum to zero"""


class PivotRatioZeroError(BlockFinderError):
    pass


class InvalidPortfolioError(BlockFinderError):
    pass


class PortfolioMismatchError(BlockFinderError):
    pass


class OracleLimitError(BlockFinderError):

    def __init__(self, product_size: int, limit: int):
        self.product_size = product_size
        self.limit = limit
        super().__init__(
            f'Exhaustive search over {product_size} tuples exceeds the limit of {limit}')
