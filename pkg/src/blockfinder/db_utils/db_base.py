import sqlite3

import pandas as pd

from blockfinder.const.records import RecordCol, RunCol, TableName, UserCol
from blockfinder.ledger.sim_log import SimulationLog
from blockfinder.logger import MyLogger

from . import DBConfig

logger = MyLogger(DBConfig.LOGGER_NAME)


class DB:
    """sqlite store of simulation runs: one row per run in the runs table, records and
    ground-truth accounts keyed by run name
    """

    _conn_dict: dict[str, sqlite3.Connection] = {}

    def __init__(self, db_name: str = DBConfig.DB_NAME):
        self._db_name = db_name

        self._on_init_check_run_table()

    @property
    def conn(self) -> sqlite3.Connection:
        if self._db_name not in self._conn_dict:
            self._conn_dict[self._db_name] = sqlite3.connect(self._db_name)
        return self._conn_dict[self._db_name]

    def close(self):
        conn = self._conn_dict.pop(self._db_name, None)
        if conn is not None:
            conn.close()

    def _exist_table(self, tbl_name: str) -> bool:
        with self.conn as conn:
            res = conn.execute("SELECT 1 FROM sqlite_master WHERE type = 'table' AND name = ?", (tbl_name,))
            ret = res.fetchone() is not None
        return ret

    def _on_init_check_run_table(self):
        """Check if the run table is correctly setup in DB"""

        if not self._exist_table(TableName.RUNS):
            with self.conn as conn:
                logger.debug('Table %s does not exist, creating a new one', TableName.RUNS)
                conn.execute(
                    f'CREATE TABLE "{TableName.RUNS}" ('
                    f' "{RunCol.RUN_NAME}" TEXT PRIMARY KEY,'
                    f' "{RunCol.CONFIG_JSON}" TEXT,'
                    f' "{RunCol.N_RECORDS}" INTEGER,'
                    f' "{RunCol.N_USERS}" INTEGER);')

    def has_run(self, run_name: str) -> bool:
        with self.conn as conn:
            res = conn.execute(
                f'SELECT 1 FROM "{TableName.RUNS}" WHERE "{RunCol.RUN_NAME}" = ?', (run_name,))
            return res.fetchone() is not None

    def delete_run(self, run_name: str):
        with self.conn as conn:
            conn.execute(f'DELETE FROM "{TableName.RUNS}" WHERE "{RunCol.RUN_NAME}" = ?', (run_name,))
            for tbl_name in (TableName.RECORDS, TableName.USERS):
                if self._exist_table(tbl_name):
                    conn.execute(f'DELETE FROM "{tbl_name}" WHERE "{RunCol.RUN_NAME}" = ?', (run_name,))

    def save_log(self, log: SimulationLog, run_name: str, replace: bool = False):

        if self.has_run(run_name):
            if not replace:
                raise ValueError(f'Run {run_name} already exists in {self._db_name}')
            logger.info('Replacing existing run %s', run_name)
            self.delete_run(run_name)

        df_records = log.records.copy()
        df_records.insert(0, RunCol.RUN_NAME, run_name)

        df_users = pd.DataFrame(
            [(u.user_id, cid, addr) for u in log.users for cid, addr in sorted(u.accounts.items())],
            columns=UserCol.to_list())
        df_users.insert(0, RunCol.RUN_NAME, run_name)

        config_json = log.config.to_json() if log.config is not None else None

        with self.conn as conn:
            conn.execute(
                f'INSERT INTO "{TableName.RUNS}" VALUES (?, ?, ?, ?)',
                (run_name, config_json, len(log), len(log.users)))

        self.add_df(df_records, TableName.RECORDS)
        self.add_df(df_users, TableName.USERS)

        logger.info('Saved run %s: %d records, %d users', run_name, len(log), len(log.users))

    def add_df(self, df: pd.DataFrame, table_name: str):

        logger.debug('Dumping DataFrame of shape %s to %s', str(df.shape), table_name)

        with self.conn as conn:
            df.to_sql(table_name, conn, if_exists='append', index=False, chunksize=100_000)


def record_query(run_name_param: str = '?') -> str:
    cols = ', '.join(f'"{c}"' for c in RecordCol.to_list())
    return (f'SELECT {cols} FROM "{TableName.RECORDS}"'
            f' WHERE "{RunCol.RUN_NAME}" = {run_name_param} ORDER BY rowid')
