import json

import numpy as np
import pandas as pd
import pytest

import bounds
import cli
import data_init
import utils
from engine import W2, W3, Strategy
from errors import InvalidConfig, NoConvergence, NumericalFailure


def _read(path):
    return pd.read_csv(path)


def test_fig3_exact_values():
    etas = np.array([-0.6, 0.0, 0.6, 1.0])
    table = cli.cmd_fig3(etas, 'exact', utils.initialize_settings(environ={}))
    assert list(table.columns) == cli.FIG3_COLUMNS
    assert np.allclose(table['dW_M1'], 0, atol=1e-12)
    assert np.allclose(table['dW_M2'], (1 - etas ** 2) / 2, atol=1e-12)


def test_fig3_command_writes_csv(tmp_path):
    out = tmp_path / 'fig3.csv'
    status = cli.main(['fig3', '--eta-min', '0', '--eta-max', '1', '--eta-steps', '3', '--out', str(out)])
    assert status == cli.EXIT_OK
    table = _read(out)
    assert list(table['Eta']) == [0.0, 0.5, 1.0]
    assert abs(table['dW_M2'][0] - 0.5) < 1e-12


def test_output_is_deterministic_across_threads(tmp_path):
    paths = []
    for threads in ('1', '1', '3'):
        out = tmp_path / f'sweep_{len(paths)}.csv'
        status = cli.main(['sweep', '--family', 'werner', '--mode', 'sampled', '--shots', '600',
                           '--seed', '7', '--eta-steps', '3', '--q-steps', '3',
                           '--threads', threads, '--out', str(out)])
        assert status == cli.EXIT_OK
        paths.append(out)
    contents = [p.read_bytes() for p in paths]
    assert contents[0] == contents[1] == contents[2]
    assert b'\r\n' not in contents[0]


def test_json_output(capsys):
    status = cli.main(['sample', '--family', 'gibbs_invariant', '--eta', '0.2', '--q', '0.5',
                       '--shots', '3000', '--format', 'json'])
    assert status == cli.EXIT_OK
    records = json.loads(capsys.readouterr().out)
    assert len(records) == 1
    assert set(records[0]) == {'Eta', 'Q', 'Exact', 'Mean', 'Std_Error', 'Shots'}
    assert records[0]['Shots'] == 3000


def test_fig4_map_werner_boundary():
    settings = utils.initialize_settings(environ={})
    table, boundary = cli.cmd_fig4_map('werner', W3, [0.0], np.linspace(0, 1, 11), settings)
    assert list(table.columns) == cli.MAP_COLUMNS
    assert abs(boundary['Q_Star'][0] - 1 / np.sqrt(3)) < 1e-9
    violating = table[table['Violation'] > 0]['Q']
    assert violating.min() == pytest.approx(0.6)


def test_fig4_map_gibbs_invariant_edges():
    settings = utils.initialize_settings(environ={})
    etas = np.linspace(-0.9, 0.9, 7)
    table, boundary = cli.cmd_fig4_map('gibbs_invariant', W3, etas, [0.0, 1.0], settings)
    assert np.all(table[table['Q'] == 0]['Violation'] <= 1e-12)
    assert np.all(table[table['Q'] == 1]['Violation'] > 0)
    assert np.allclose(table['Effective_Eta'], np.repeat(etas, 2), atol=1e-12)
    assert len(boundary) == len(etas)


def test_fig4_map_command_with_boundary_file(tmp_path):
    out = tmp_path / 'map.csv'
    boundary_out = tmp_path / 'boundary.csv'
    status = cli.main(['fig4-map', '--family', 'werner', '--strategy', 'w2', '--eta-steps', '3',
                       '--q-steps', '5', '--out', str(out), '--boundary-out', str(boundary_out)])
    assert status == cli.EXIT_OK
    assert len(_read(out)) == 15
    boundary = _read(boundary_out)
    assert list(boundary.columns) == ['Eta', 'Q_Star']
    assert np.all((boundary['Q_Star'] > 0) & (boundary['Q_Star'] < 1))


def test_scatter_command(tmp_path, capsys):
    out = tmp_path / 'scatter.csv'
    status = cli.main(['fig4-scatter', '--family', 'werner', '--eta-min', '-0.5', '--eta-max', '0.5',
                       '--eta-steps', '3', '--q-steps', '6', '--out', str(out)])
    assert status == cli.EXIT_OK
    assert 'rank_correlation=' in capsys.readouterr().err
    assert list(_read(out).columns) == ['Eta', 'Q', 'Steering_Violation', 'Work_Violation']


def test_bound_command(tmp_path):
    out = tmp_path / 'bound.csv'
    status = cli.main(['bound', '--eta', '0', '--strategy', 'w3', '--out', str(out)])
    assert status == cli.EXIT_OK
    table = _read(out)
    assert 1 <= len(table) <= 4
    assert abs(table['Closed'][0] - 1 / (2 * np.sqrt(3))) < 1e-12
    assert abs(table['Oracle'][0] - table['Closed'][0]) < 2e-3
    assert abs(table['Replay'][0] - table['Oracle'][0]) < 1e-9
    assert abs(table['Weight'].sum() - 1) < 1e-9


def test_explicit_weights_override_preset(tmp_path):
    out = tmp_path / 'bound.csv'
    status = cli.main(['bound', '--eta', '0.3', '--strategy', 'w3', '--c1', '0.5', '--c2', '0.5',
                       '--resolution', '2000', '--out', str(out)])
    assert status == cli.EXIT_OK
    table = _read(out)
    assert list(table[['C1', 'C2', 'C3']].iloc[0]) == [0.5, 0.5, 0.0]


@pytest.mark.parametrize('argv', [
    ['sweep', '--family', 'thermal'],
    ['bound', '--eta', '0', '--resolution', '10'],
    ['bound', '--eta', '1.5'],
    ['sweep', '--c1', '0.7', '--c2', '0.7'],
    ['sample', '--shots', '0'],
    ['fig3', '--eta-max', '2'],
])
def test_invalid_input_exit_code(argv):
    assert cli.main(argv) == cli.EXIT_INVALID


def test_unknown_flag_is_rejected():
    with pytest.raises(SystemExit) as e:
        cli.main(['bound', '--nope'])
    assert e.value.code == 2


def test_numerical_failure_exit_code(monkeypatch):
    def fail(query, resolution=20000):
        raise NoConvergence("solver stopped")

    monkeypatch.setattr(bounds, 'lhs_bound_oracle', fail)
    assert cli.main(['bound', '--eta', '0']) == cli.EXIT_NUMERICAL


def test_config_file_and_overrides(tmp_path):
    config = tmp_path / 'szilard.toml'
    config.write_text('family = "gibbs_invariant"\neta-steps = 3\nstrategy = "w2"\n')

    settings = utils.initialize_settings(str(config), {'eta_steps': 5, 'q_steps': None})
    assert settings['family'] == 'gibbs_invariant'
    assert settings['eta_steps'] == 5
    assert settings['q_steps'] == utils.DEFAULT_SETTINGS['q_steps']
    assert utils.resolve_strategy(settings) == W2

    from_env = utils.initialize_settings(environ={utils.CONFIG_ENV_VAR: str(config)})
    assert from_env['eta_steps'] == 3

    out = tmp_path / 'sweep.csv'
    assert cli.main(['sweep', '--config', str(config), '--out', str(out)]) == cli.EXIT_OK
    assert len(_read(out)) == 3 * utils.DEFAULT_SETTINGS['q_steps']


def test_config_file_errors(tmp_path):
    bad = tmp_path / 'bad.toml'
    bad.write_text('temperature = 3\n')
    with pytest.raises(InvalidConfig):
        utils.initialize_settings(str(bad))
    with pytest.raises(InvalidConfig):
        utils.initialize_settings(str(tmp_path / 'missing.toml'))
    assert cli.main(['sweep', '--config', str(bad)]) == cli.EXIT_INVALID


def test_resolve_strategy():
    base = dict(utils.DEFAULT_SETTINGS)
    assert utils.resolve_strategy(base) == W3
    assert utils.resolve_strategy({**base, 'c2': 0.25, 'c3': 0.75}) == Strategy(0.0, 0.25, 0.75)
    with pytest.raises(InvalidConfig):
        utils.resolve_strategy({**base, 'strategy': 'w9'})


def test_validate_table_rejects_non_finite():
    with pytest.raises(NumericalFailure):
        utils.validate_table(pd.DataFrame({'Eta': [0.0, np.nan]}))
    with pytest.raises(NumericalFailure):
        utils.validate_table(pd.DataFrame({'Eta': [0.0], 'Label': ['x']}))


def test_make_grid():
    assert list(utils.make_grid(0, 1, 1)) == [0.0]
    assert np.allclose(utils.make_grid(-1, 1, 5), [-1, -0.5, 0, 0.5, 1])


def test_initialize_data_files(tmp_path, monkeypatch):
    monkeypatch.delenv(utils.CONFIG_ENV_VAR, raising=False)
    data_dir = tmp_path / 'data'
    written = data_init.initialize_data_files(str(data_dir))
    names = sorted(p.split('/')[-1] for p in written)
    assert names == sorted([
        'fig3.csv',
        'fig4_map_werner_w3.csv',
        'fig4_boundary_werner_w3.csv',
        'fig4_map_gibbs_invariant_w3.csv',
        'fig4_boundary_gibbs_invariant_w3.csv',
    ])
    assert len(_read(data_dir / 'fig3.csv')) == 41
    assert len(_read(data_dir / 'fig4_map_werner_w3.csv')) == 19 * 11
    assert data_init.initialize_data_files(str(data_dir)) == []


@pytest.mark.parametrize('line, command', [
    ('eta-steps = "many"', 'sweep'),
    ('shots = "lots"', 'sample'),
    ('correct-readout = "yes"', 'sample'),
    ('eta = true', 'bound'),
    ('strategy = 3', 'sweep'),
])
def test_mistyped_config_value_is_invalid(tmp_path, line, command):
    config = tmp_path / 'typo.toml'
    config.write_text(line + '\n')
    with pytest.raises(InvalidConfig):
        utils.load_config_file(str(config))
    assert cli.main([command, '--config', str(config)]) == cli.EXIT_INVALID


def test_config_numbers_are_coerced(tmp_path):
    config = tmp_path / 'numbers.toml'
    config.write_text('eta = 0\nc1 = 1\nreadout-fidelity = 1\nout = "table.csv"\n')
    settings = utils.load_config_file(str(config))
    assert settings == {'eta': 0.0, 'c1': 1.0, 'readout_fidelity': 1.0, 'out': 'table.csv'}
    assert isinstance(settings['eta'], float)


def test_init_data_uses_command_line_settings(tmp_path, monkeypatch):
    data_dir = tmp_path / 'data'
    data_dir.mkdir()
    # only fig3.csv is missing
    for family in ('werner', 'gibbs_invariant'):
        (data_dir / f'fig4_map_{family}_w3.csv').write_text('Eta\n0\n')

    pools = []
    make_pool = cli._pool

    def recording_pool(threads):
        pools.append(threads)
        return make_pool(threads)

    monkeypatch.setattr(cli, '_pool', recording_pool)
    status = cli.main(['init-data', '--data-dir', str(data_dir), '--threads', '2'])
    assert status == cli.EXIT_OK
    assert pools == [2]
    assert len(_read(data_dir / 'fig3.csv')) == 41
