from pathlib import Path

class DBConfig:

    DB_NAME: str = (Path.cwd() / 'blockfinder.db').absolute().as_posix()

    LOGGER_NAME = 'db-utils'
