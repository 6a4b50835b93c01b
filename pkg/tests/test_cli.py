import json
import logging

import pytest

from src.cli.commands import (EXIT_CONFIG, EXIT_OK, EXIT_VERDICT, _check_inputs, chord_config, effective_config,
                              output_dir)
from src.cli.main import build_parser, main, run
from src.cli.schema import validate_config, validation_errors
from src.errors import ConfigError
from src.utils import get_data_file_path

TORUS_RUN = {
    'name': 'three discs on the torus',
    'grid': {'kind': 'torus', 'size': [1.0, 1.0], 'cells': 32},
    'datum': {'domain': {'kind': 'disc', 'normalization': 'pb'},
              'marked_points': [0.0, 1.0 / 3.0, 2.0 / 3.0]},
    'sets': [{'kind': 'disc', 'center': [x, 0.5], 'radius': 0.06} for x in (0.2, 0.5, 0.8)],
    'invariant': {'kind': 'Pb_N'},
    'schedule': {'ladder': [8], 'max_iterations': 20, 'plateau_window': 10},
    'seed': 0,
}


def write_config(tmp_path, payload, name='config.json'):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding='utf-8')
    return str(path)


def read_json(path):
    return json.loads(path.read_text(encoding='utf-8'))


def test_parser_subcommands():
    args = build_parser().parse_args(['certify', '--config', 'c.json', '--grid-override', '21'])
    assert args.command == 'certify'
    assert args.grid_override == 21
    with pytest.raises(SystemExit):
        build_parser().parse_args(['estimate', '--config', 'c.json', '--objective', 'min'])


def test_effective_config_overrides():
    base = {'grid': {'kind': 'plane', 'cells': 64}}
    out = effective_config('estimate', base, seed=3, grid_override=32, objective='max')
    assert out['grid']['cells'] == 32
    assert out['seed'] == 3
    assert out['invariant']['objective'] == 'max'
    assert base['grid']['cells'] == 64
    assert effective_config('certify', {}, grid_override=21)['n'] == 21
    assert effective_config('theorems', {}, grid_override=48, objective='max') == \
        {'cells': 48, 'schedule': {'objective': 'max'}}


def test_output_dir_precedence(tmp_path):
    assert output_dir('estimate', {'output': 'x'}, str(tmp_path)) == tmp_path
    assert str(output_dir('estimate', {'output': 'x'})) == 'x'
    first = output_dir('estimate', {'grid': {'kind': 'plane'}})
    assert first == output_dir('estimate', {'grid': {'kind': 'plane'}})
    assert first.name.startswith('estimate-')


@pytest.mark.parametrize('command, name', [
    ('certify', 'configs/certify_disc.json'),
    ('chords', 'configs/chords_shear.json'),
    ('estimate', 'configs/circle_pbx.json'),
    ('estimate', 'configs/torus_triple.json'),
    ('theorems', 'suites/default.json'),
    ('theorems', 'suites/smoke.json'),
])
def test_shipped_configs_validate(command, name):
    config = json.loads(get_data_file_path(name).read_text(encoding='utf-8'))
    assert validation_errors(command, config) == []


def test_missing_marked_points_names_the_key():
    config = dict(TORUS_RUN, datum={'domain': {'kind': 'disc'}})
    with pytest.raises(ConfigError) as info:
        validate_config('estimate', config)
    assert 'marked_points' in str(info.value)
    assert 'datum' in str(info.value)


def test_invalid_config_exits_with_config_code(tmp_path, caplog):
    path = write_config(tmp_path, dict(TORUS_RUN, datum={'domain': {'kind': 'disc'}}))
    with caplog.at_level(logging.ERROR):
        assert run('estimate', path, str(tmp_path / 'out')) == EXIT_CONFIG
    assert 'marked_points' in caplog.text
    assert not (tmp_path / 'out').exists()


def test_missing_and_malformed_files(tmp_path):
    assert run('certify', str(tmp_path / 'nope.json')) == EXIT_CONFIG
    broken = tmp_path / 'broken.json'
    broken.write_text('{"recipe": ', encoding='utf-8')
    assert run('certify', str(broken)) == EXIT_CONFIG


def test_certify_identity(tmp_path):
    path = write_config(tmp_path, {'recipe': {'kind': 'identity'}, 'n': 11})
    out = tmp_path / 'out'
    assert main(['certify', '--config', path, '--out', str(out)]) == EXIT_OK
    payload = read_json(out / 'certification.json')
    assert payload['verdict'] == 'pass'
    assert payload['grid']['n'] == 11
    assert 'config_hash' in payload and 'tool_version' in payload


def test_certify_reports_violated_bound(tmp_path):
    recipe = {'kind': 'pseudoretract_smooth', 'domain': {'kind': 'disc', 'radius': 1.0}, 'eps': 0.1,
              'declared_bound': 1.0}
    path = write_config(tmp_path, {'recipe': recipe, 'n': 81})
    out = tmp_path / 'out'
    assert run('certify', path, str(out)) == EXIT_VERDICT
    payload = read_json(out / 'certification.json')
    assert payload['verdict'] == 'fail'
    assert len(payload['argmax']) == 2


def test_empty_suite(tmp_path):
    path = write_config(tmp_path, {'name': 'nothing', 'checks': []})
    out = tmp_path / 'out'
    assert run('theorems', path, str(out)) == EXIT_OK
    text = (out / 'summary.txt').read_text(encoding='utf-8')
    assert text.startswith('nothing: PASS')
    assert '(empty suite)' in text
    assert (out / 'summary.csv').read_text(encoding='utf-8').startswith('row,check,name,lhs,rhs')


def test_unknown_check_parameter_is_an_error_row(tmp_path):
    suite = {'checks': [{'check': 'monotonicity', 'params': {'eps': 0.1}}]}
    path = write_config(tmp_path, suite)
    out = tmp_path / 'out'
    assert run('theorems', path, str(out)) == EXIT_VERDICT
    assert 'FAIL' in (out / 'summary.txt').read_text(encoding='utf-8')
    assert read_json(out / 'summary.json')['reports'][0]['error'].startswith('ConfigError')


def test_htpy_refine_adds_a_finer_pass():
    row = {'check': 'htpy', 'fixture': 'circle_decomposition', 'params': {'rel_tol': 0.15, 'refine': True}}
    (sets,), params = _check_inputs(row, 64)
    assert 'refine' not in params
    assert sets.grid.cells == (64, 64)
    assert params['fine_config'].grid.cells == (128, 128)
    assert len(params['fine_loops']) == len(params['loops'])


def test_htpy_without_refine_has_a_single_pass():
    (_,), params = _check_inputs({'check': 'htpy'}, 64)
    assert 'fine_config' not in params and 'loops' in params


def test_unknown_hamiltonian_kind_is_rejected(tmp_path):
    config = {'grid': {'kind': 'plane', 'cells': 32}, 'hamiltonian': {'kind': 'cubic'},
              'A': {'kind': 'disc', 'center': [0.0, 0.0], 'radius': 0.2},
              'B': {'kind': 'disc', 'center': [0.5, 0.5], 'radius': 0.2}, 'p': 1.0}
    assert run('chords', write_config(tmp_path, config), str(tmp_path / 'out')) == EXIT_CONFIG


def test_incomplete_hamiltonian_is_a_config_error(tmp_path):
    config = {'grid': {'kind': 'plane', 'cells': 32}, 'hamiltonian': {'kind': 'gaussian', 'center': [0.0, 0.0]},
              'A': {'kind': 'disc', 'center': [0.0, 0.0], 'radius': 0.2},
              'B': {'kind': 'disc', 'center': [0.5, 0.5], 'radius': 0.2}, 'p': 1.0}
    assert run('chords', write_config(tmp_path, config), str(tmp_path / 'out')) == EXIT_CONFIG


def test_chord_config_merges_fixture():
    merged = chord_config({'fixture': 'shear', 'grid': {'kind': 'plane', 'cells': 32}, 'p': 2.0})
    assert merged['grid']['cells'] == 32
    assert merged['p'] == 2.0
    assert merged['hamiltonian'] == {'kind': 'linear', 'a': 0.0, 'b': 1.0}
    assert 'fixture' not in merged


def test_chords_on_invariant_annuli(tmp_path):
    out = tmp_path / 'out'
    assert run('chords', write_config(tmp_path, {'fixture': 'annuli'}), str(out)) == EXIT_OK
    payload = read_json(out / 'chords.json')
    assert payload['chord_count'] == 0


def test_shear_chords_and_trajectory(tmp_path):
    out = tmp_path / 'out'
    path = str(get_data_file_path('configs/chords_shear.json'))
    assert run('chords', path, str(out)) == EXIT_OK
    payload = read_json(out / 'chords.json')
    assert payload['chord_count'] > 0
    assert payload['details']['rescaling']['ok']
    lines = (out / 'trajectory_0.csv').read_text(encoding='utf-8').splitlines()
    assert lines[0] == 't,x,y'
    assert len(lines) == 752


def test_estimate_is_byte_reproducible(tmp_path):
    path = write_config(tmp_path, TORUS_RUN)
    first, second = tmp_path / 'first', tmp_path / 'second'
    assert run('estimate', path, str(first)) == EXIT_OK
    assert run('estimate', path, str(second)) == EXIT_OK
    for name in ('estimate.json', 'witness.bin', 'bracket.csv'):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    payload = read_json(first / 'estimate.json')
    assert payload['kind'] == 'Pb_3'
    assert payload['admissibility']['all_ok']


def test_estimate_datum_size_mismatch(tmp_path):
    config = dict(TORUS_RUN, datum={'domain': {'kind': 'disc', 'normalization': 'pb'},
                                    'marked_points': [0.0, 0.25, 0.5, 0.75]})
    assert run('estimate', write_config(tmp_path, config), str(tmp_path / 'out')) == EXIT_CONFIG
