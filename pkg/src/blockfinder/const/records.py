
class RecordCol:

    TURN     : str = 'turn'
    CURRENCY : str = 'currency'
    SRC      : str = 'src'
    DST      : str = 'dst'
    AMOUNT   : str = 'amount'
    FEE      : str = 'fee'

    @classmethod
    def to_list(cls) -> list[str]:
        return [cls.TURN, cls.CURRENCY, cls.SRC, cls.DST, cls.AMOUNT, cls.FEE]


class UserCol:

    USER_ID  : str = 'user_id'
    CURRENCY : str = 'currency'
    ADDRESS  : str = 'address'

    @classmethod
    def to_list(cls) -> list[str]:
        return [cls.USER_ID, cls.CURRENCY, cls.ADDRESS]


class RunCol:

    RUN_NAME    : str = 'run_name'
    CONFIG_JSON : str = 'config_json'
    N_RECORDS   : str = 'n_records'
    N_USERS     : str = 'n_users'


class TableName:

    RUNS    = 'sim_runs'
    RECORDS = 'sim_records'
    USERS   = 'sim_users'

    @classmethod
    def to_list(cls) -> list[str]:
        return [cls.RUNS, cls.RECORDS, cls.USERS]
