FRAC_DIGITS: int = 12
SCALE: int = 10 ** FRAC_DIGITS
ONE: int = SCALE

INT64_MAX: int = 2 ** 63 - 1
UINT64_MAX: int = 2 ** 64 - 1

# Address 0 is never handed out, it marks value creation in the int64 columns
MINT_ADDRESS: int = 0
MINT_LABEL: str = 'MINT'


class SearchDefaults:

    CANDIDATE_PRODUCT_LIMIT: int = 10 ** 6
    ORACLE_PRODUCT_LIMIT: int = 10 ** 7


class ExperimentDefaults:

    HISTOGRAM_BINS: int = 20
    MAX_RESAMPLE: int = 20
