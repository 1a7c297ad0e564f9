from .db_config import DBConfig

from .db_base import DB
from .db_fetcher import DBFetcher
