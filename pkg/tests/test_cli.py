import json

import pytest

from blockfinder.cli import main
from blockfinder.const.sim import SimConfig, make_currency


@pytest.fixture
def sim_config_file(tmp_path):
    cfg = SimConfig(currencies=[make_currency(1, beta0=2, beta1='0.2', miner_fee_rate='0.01', miner_reward=1),
                                make_currency(2, beta0=1, miner_fee_rate='0.02', miner_reward=2)],
                    turns=15, seed=5)
    path = tmp_path / 'sim.json'
    path.write_text(cfg.to_json())
    return path


def _run_pipeline(tmp_path, sim_config_file, tag: str) -> dict[str, bytes]:
    out = tmp_path / tag
    out.mkdir()
    assert main(['simulate', '--config', str(sim_config_file), '--out', str(out / 'log.jsonl'),
                 '--ground-truth', str(out / 'users.json')]) == 0
    assert main(['snapshot', '--log', str(out / 'log.jsonl'), '--time', '15', '--out', str(out / 'snap.json')]) == 0

    (out / 'portfolio.json').write_text(json.dumps({'alphas': {'1': '0.5', '2': '0.5'}}))

    assert main(['find', '--snapshot', str(out / 'snap.json'), '--portfolio', str(out / 'portfolio.json'),
                 '--threshold', '1.5', '--top', '3', '--out', str(out / 'found.json')]) == 0
    return {p.name: p.read_bytes() for p in out.iterdir()}


def test_pipeline_is_deterministic(tmp_path, sim_config_file):
    first = _run_pipeline(tmp_path, sim_config_file, 'a')
    second = _run_pipeline(tmp_path, sim_config_file, 'b')
    assert first == second

    found = json.loads(first['found.json'])
    assert set(found) == {'best', 'retained', 'diagnostics'}
    assert len(found['retained']) <= 3
    if found['best'] is not None:
        assert float(found['best']['score']) >= 1.5


def test_oracle_command(tmp_path):
    snap = {'time': 0, 'dbs': [{'currency': 1, 'accounts': [[1, '2.0']]},
                               {'currency': 2, 'accounts': [[3, '1.0'], [4, '3.0']]}]}
    (tmp_path / 'snap.json').write_text(json.dumps(snap))
    (tmp_path / 'p.json').write_text(json.dumps({'alphas': {'1': '0.4', '2': '0.6'}}))

    assert main(['oracle', '--snapshot', str(tmp_path / 'snap.json'), '--portfolio', str(tmp_path / 'p.json'),
                 '--out', str(tmp_path / 'oracle.json')]) == 0
    result = json.loads((tmp_path / 'oracle.json').read_text())
    assert result['tuples_examined'] == 2
    assert [a['address'] for a in result['best']['accounts']] == [1, 4]

    assert main(['oracle', '--snapshot', str(tmp_path / 'snap.json'), '--portfolio', str(tmp_path / 'p.json'),
                 '--limit', '1']) == 2


def test_domain_errors_exit_with_2(tmp_path):
    snap = {'time': 0, 'dbs': [{'currency': 1, 'accounts': [[1, '2.0']]}]}
    (tmp_path / 'snap.json').write_text(json.dumps(snap))
    (tmp_path / 'p.json').write_text(json.dumps({'alphas': {'1': '0.5', '2': '0.5'}}))
    assert main(['find', '--snapshot', str(tmp_path / 'snap.json'), '--portfolio', str(tmp_path / 'p.json')]) == 2

    bad = tmp_path / 'bad.json'
    bad.write_text(json.dumps({'currencies': [{'currency_id': 1, 'miner_fee_rate': '2', 'beta0': '1'}], 'turns': 3}))
    assert main(['simulate', '--config', str(bad)]) == 2


def test_simulate_into_db(tmp_path, sim_config_file):
    db = str(tmp_path / 'runs.db')
    assert main(['simulate', '--config', str(sim_config_file), '--db', db, '--run-name', 'r1']) == 0
    assert main(['snapshot', '--db', db, '--run-name', 'r1', '--time', '10', '--out', str(tmp_path / 's.json')]) == 0
    assert json.loads((tmp_path / 's.json').read_text())['time'] == 10


def test_log_flag_needs_a_file(tmp_path, sim_config_file):
    log_path = tmp_path / 'run.log'
    assert main(['-l', str(log_path), 'simulate', '--config', str(sim_config_file),
                 '--out', str(tmp_path / 'log.jsonl')]) == 0
    assert log_path.stat().st_size > 0

    with pytest.raises(SystemExit):
        main(['-l', 'simulate', '--config', str(sim_config_file)])
