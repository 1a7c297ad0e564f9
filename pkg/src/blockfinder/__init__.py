from blockfinder.logger import MyLogger
from blockfinder.exceptions import BlockFinderError

__version__ = '0.1.0'
