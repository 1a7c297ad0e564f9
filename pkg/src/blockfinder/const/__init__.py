from .defaults import SCALE, ONE, MINT_ADDRESS, MINT_LABEL, SearchDefaults, ExperimentDefaults
from .records import RecordCol, UserCol, RunCol, TableName
