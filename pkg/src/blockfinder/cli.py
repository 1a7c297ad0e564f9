"""Command-line entry point: `blockfinder <command> ...`"""

import json
import logging
import sys
from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Optional, Sequence

from blockfinder.const.defaults import SearchDefaults
from blockfinder.const.experiment import ExperimentConfig
from blockfinder.const.sim import SimConfig
from blockfinder.db_utils import DB, DBConfig, DBFetcher
from blockfinder.exceptions import BlockFinderError
from blockfinder.experiment import run_experiment
from blockfinder.finder import FinderParams, Portfolio, find_accounts
from blockfinder.ledger import SimulationLog, simulate
from blockfinder.logger import MyLogger
from blockfinder.oracle import exhaustive_best
from blockfinder.snapshot import Snapshot, read_rates, replay
from blockfinder.utils import format_fixed, to_fixed

logger = MyLogger('cli')


def _dump_json(payload: dict, out: Optional[str]):
    text = json.dumps(payload, indent=2) + '\n'
    if out:
        with open(out, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        logger.info('Result written to %s', out)
    else:
        sys.stdout.write(text)


def _use_db(path: Optional[str]):
    if path:
        logger.info('Using user given database %s', path)
        DBConfig.DB_NAME = path


def cmd_simulate(args: Namespace):
    config = SimConfig.load(args.config)
    log = simulate(config)

    if args.out:
        log.write_jsonl(args.out)
    if args.ground_truth:
        log.write_ground_truth(args.ground_truth)
    if args.db:
        _use_db(args.db)
        db = DB(DBConfig.DB_NAME)
        db.save_log(log, args.run_name or Path(args.config).stem, replace=args.replace)
        db.close()


def cmd_snapshot(args: Namespace):
    if args.db:
        _use_db(args.db)
        with DBFetcher(DBConfig.DB_NAME) as fetcher:
            log: SimulationLog | str = fetcher.load_log(args.run_name)
    elif args.log:
        log = args.log
    else:
        raise BlockFinderError('Either --log or --db with --run-name is required')

    rates = read_rates(args.rates) if args.rates else None
    snapshot = replay(log, args.time, rates=rates)
    snapshot.save(args.out)
    logger.info('Snapshot at t=%d with %d accounts saved to %s', snapshot.time, snapshot.total_accounts(), args.out)


def cmd_find(args: Namespace):
    snapshot = Snapshot.load(args.snapshot)
    portfolio = Portfolio.load(args.portfolio)
    params = FinderParams(score_threshold=to_fixed(args.threshold, 'threshold'), max_answers=args.top)

    result = find_accounts(snapshot, portfolio, params, workers=args.workers)
    if result.hit:
        logger.info('Best tuple %s with score %s', result.best.addresses, format_fixed(result.best.score))
    else:
        logger.info('No tuple reaches the threshold %s', args.threshold)
    _dump_json(result.to_dict(top=args.top), args.out)


def cmd_oracle(args: Namespace):
    snapshot = Snapshot.load(args.snapshot)
    portfolio = Portfolio.load(args.portfolio)

    result = exhaustive_best(snapshot, portfolio, limit=args.limit)
    _dump_json({'best': None if result.best is None else result.best.to_dict(),
                'tuples_examined': result.tuples_examined}, args.out)


def cmd_experiment(args: Namespace):
    config = ExperimentConfig.load(args.config)
    result = run_experiment(config)
    result.write(args.out_dir)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog='blockfinder')
    parser.add_argument('-l', '--log', type=str, default=None, dest='log_file', metavar='FILE')
    parser.add_argument('-v', '--verbose', action='store_true')
    subparsers = parser.add_subparsers(dest='command', required=True)

    p = subparsers.add_parser('simulate', help='Run the ledger simulator')
    p.add_argument('--config', required=True)
    p.add_argument('--out', help='JSONL transaction log')
    p.add_argument('--ground-truth', help='user -> accounts mapping')
    p.add_argument('-D', '--db', help='sqlite database to store the run in')
    p.add_argument('--run-name', help='defaults to the config file name')
    p.add_argument('--replace', action='store_true')
    p.set_defaults(func=cmd_simulate)

    p = subparsers.add_parser('snapshot', help='Replay a log into balance databases')
    p.add_argument('--log', dest='log')
    p.add_argument('-D', '--db')
    p.add_argument('--run-name')
    p.add_argument('--time', type=int, required=True)
    p.add_argument('--rates')
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_snapshot)

    p = subparsers.add_parser('find', help='Search the accounts matching a portfolio')
    p.add_argument('--snapshot', required=True)
    p.add_argument('--portfolio', required=True)
    p.add_argument('--threshold', default='0')
    p.add_argument('--top', type=int, default=None)
    p.add_argument('--workers', type=int, default=1)
    p.add_argument('--out')
    p.set_defaults(func=cmd_find)

    p = subparsers.add_parser('oracle', help='Exhaustive search, for checking find')
    p.add_argument('--snapshot', required=True)
    p.add_argument('--portfolio', required=True)
    p.add_argument('--limit', type=int, default=SearchDefaults.ORACLE_PRODUCT_LIMIT)
    p.add_argument('--out')
    p.set_defaults(func=cmd_oracle)

    p = subparsers.add_parser('experiment', help='Run the case-study sweep')
    p.add_argument('--config', required=True)
    p.add_argument('--out-dir', required=True)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    MyLogger.setup(log_filename=args.log_file,
                   level=logging.DEBUG if args.verbose else logging.INFO,
                   to_file=args.log_file is not None)
    MyLogger.setProject(args.command)

    try:
        args.func(args)
    except BlockFinderError as e:
        logger.error('%s', e)
        return 2
    except Exception:
        logger.error('Unexpected failure', exc_info=True)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
