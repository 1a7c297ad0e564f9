import json

import numpy as np
import pandas as pd

from blockfinder.const.records import RecordCol, RunCol, TableName, UserCol
from blockfinder.const.sim import SimConfig
from blockfinder.ledger.sim_log import SimulationLog, UserAccounts
from blockfinder.logger import MyLogger

from . import DB, DBConfig
from .db_base import record_query

logger = MyLogger(DBConfig.LOGGER_NAME)


class DBFetcher:

    def __init__(self, db_name: str = DBConfig.DB_NAME):
        self._db_name = db_name
        self.db = DB(db_name)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        return

    @property
    def conn(self):
        return self.db.conn

    def read_sql(self, sql: str, params: tuple = ()) -> pd.DataFrame:
        logger.debug("Fetching df using the following query:\n%s", sql)
        return pd.read_sql(sql, self.conn, params=params)

    def list_runs(self) -> list[str]:
        df = self.read_sql(f'SELECT "{RunCol.RUN_NAME}" FROM "{TableName.RUNS}" ORDER BY 1')
        return df[RunCol.RUN_NAME].to_list()

    def load_log(self, run_name: str) -> SimulationLog:

        df_run = self.read_sql(
            f'SELECT * FROM "{TableName.RUNS}" WHERE "{RunCol.RUN_NAME}" = ?', (run_name,))
        if df_run.empty:
            raise KeyError(f'Run {run_name} not found in {self._db_name}')

        config_json = df_run.iloc[0][RunCol.CONFIG_JSON]
        config = SimConfig.from_dict(json.loads(config_json)) if config_json else None

        df_records = self.read_sql(record_query(), (run_name,))
        records = df_records[RecordCol.to_list()].astype(np.int64)

        df_users = self.read_sql(
            f'SELECT {", ".join(UserCol.to_list())} FROM "{TableName.USERS}"'
            f' WHERE "{RunCol.RUN_NAME}" = ? ORDER BY {UserCol.USER_ID}, {UserCol.CURRENCY}',
            (run_name,))

        users: dict[int, UserAccounts] = {}
        for uid, cid, addr in df_users.itertuples(index=False, name=None):
            users.setdefault(int(uid), UserAccounts(user_id=int(uid))).accounts[int(cid)] = int(addr)

        logger.info('Loaded run %s: %d records, %d users', run_name, len(records), len(users))
        return SimulationLog(records, config=config, users=[users[k] for k in sorted(users)])
