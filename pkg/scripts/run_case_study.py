from argparse import ArgumentParser

from blockfinder.logger import MyLogger
from blockfinder.db_utils import DB, DBConfig
from blockfinder.config import load_case_study
from blockfinder.ledger import simulate
from blockfinder.experiment import run_experiment

parser = ArgumentParser()
parser.add_argument('-l', '--log', type=str, default=None, metavar='FILE')
parser.add_argument('-o', '--out-dir', type=str, default='case_study')
parser.add_argument('-q', '--queries', type=int, default=None)
parser.add_argument('-D', '--database', type=str, nargs='?', default='')
parser.add_argument('--oracle-check', action='store_true')

args = parser.parse_args()

MyLogger.setup(log_filename=args.log)
MyLogger.setProject('case-study')
logger = MyLogger()

overrides = {}
if args.queries:
    overrides['queries_per_m'] = args.queries
if args.oracle_check:
    overrides['oracle_check'] = True
config = load_case_study(**overrides)

log = simulate(config.sim)

if args.database:
    logger.info('Using user given database %s', args.database)
    DBConfig.DB_NAME = args.database
    DB(DBConfig.DB_NAME).save_log(log, 'case-study', replace=True)

result = run_experiment(config, log=log)
result.write(args.out_dir)
