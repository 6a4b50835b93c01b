import pandas as pd
import pytest

from src.cli.commands import EXIT_OK
from src.ui.certify_tab import build_recipe
from src.ui.history_tab import MAX_HISTORY_ENTRIES, export_with_sheets, history_frame, run_overview, save_to_history
from src.ui.runs_tab import execute_run, guess_command, list_example_configs, read_csv_artifacts
from src.ui.share_tab import generate_share_text


@pytest.fixture
def certify_entry(tmp_path):
    return execute_run('certify', {'name': 'identity', 'recipe': {'kind': 'identity'}, 'n': 11}, tmp_path)


@pytest.mark.parametrize('config, command', [
    ({'recipe': {'kind': 'identity'}}, 'certify'),
    ({'checks': []}, 'theorems'),
    ({'fixture': 'shear'}, 'chords'),
    ({'fixture': 'circle_decomposition', 'grid': {'kind': 'plane'}}, 'estimate'),
])
def test_guess_command(config, command):
    assert guess_command(config) == command


def test_examples_are_listed():
    examples = list_example_configs()
    assert 'configs/certify_disc.json' in examples
    assert 'suites/smoke.json' in examples


def test_execute_run_builds_a_history_entry(certify_entry, tmp_path):
    assert certify_entry['exit_code'] == EXIT_OK
    assert certify_entry['payload']['verdict'] == 'pass'
    assert set(certify_entry['artifacts']) == {'certification.json', 'config.json'}
    assert certify_entry['out_dir'].startswith(str(tmp_path))


def test_history_is_bounded(certify_entry):
    history = []
    for _ in range(MAX_HISTORY_ENTRIES + 5):
        save_to_history(dict(certify_entry), history)
    assert len(history) == MAX_HISTORY_ENTRIES
    save_to_history({'command': 'estimate'}, history)
    assert len(history) == MAX_HISTORY_ENTRIES


def test_history_frame_and_overview(certify_entry):
    frame = history_frame([certify_entry])
    assert frame['Command'].tolist() == ['certify']
    assert frame['Value'].iloc[0] == pytest.approx(1.0)
    overview = run_overview(certify_entry)
    assert 'verdict' in overview['Field'].tolist()


def test_excel_export_has_one_sheet_per_table(certify_entry):
    tables = {'chords.csv': pd.DataFrame({'time': [0.75]})}
    output, filename = export_with_sheets(certify_entry, tables)
    assert filename.startswith('certify_')
    sheets = pd.read_excel(output, sheet_name=None)
    assert list(sheets) == ['Run', 'chords']
    assert sheets['chords']['time'].tolist() == [0.75]


def test_read_csv_artifacts_skips_json(certify_entry):
    assert read_csv_artifacts(certify_entry) == {}


def test_share_text(certify_entry):
    text = generate_share_text(certify_entry)
    assert 'JACOBIAN CERTIFICATION' in text
    assert 'verdict: PASS' in text
    assert '• certification.json' in text


def test_build_recipe():
    assert build_recipe('identity', {}) == {'kind': 'identity'}
    recipe = build_recipe('pseudoretract_smooth', {'domain': 'disc', 'eps': 0.1, 'declared_bound': 1.0})
    assert recipe == {'kind': 'pseudoretract_smooth', 'domain': {'kind': 'disc', 'radius': 1.0}, 'eps': 0.1,
                      'declared_bound': 1.0}
