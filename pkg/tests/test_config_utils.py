import json
import math

import numpy as np
import pytest

from src.config import Config
from src.utils import canonical_json, config_hash, get_data_file_path, load_json_resource


@pytest.fixture
def restore_config():
    saved = (Config.MAX_WORKERS, Config.P_LADDER)
    yield
    Config.MAX_WORKERS, Config.P_LADDER = saved


def test_canonical_json_sorts_keys_and_converts_numpy():
    text = canonical_json({'b': np.float64(0.1), 'a': np.arange(3), 'c': np.bool_(True)})
    assert list(json.loads(text)) == ['a', 'b', 'c']
    assert json.loads(text) == {'a': [0, 1, 2], 'b': 0.1, 'c': True}
    assert text.endswith('\n')


def test_canonical_json_non_finite_as_strings():
    data = json.loads(canonical_json({'x': math.inf, 'y': float('nan'), 'z': -math.inf}))
    assert data == {'x': 'inf', 'y': 'nan', 'z': '-inf'}


def test_config_hash_ignores_key_order():
    assert config_hash({'a': 1, 'b': [1.0, 2.0]}) == config_hash({'b': [1.0, 2.0], 'a': 1})
    assert config_hash({'a': 1}) != config_hash({'a': 2})
    assert len(config_hash({})) == 64


def test_config_update(restore_config):
    Config.update(MAX_WORKERS=1, P_LADDER=[4, 16])
    assert Config.MAX_WORKERS == 1
    assert Config.get_ladder() == (4.0, 16.0)


def test_tolerances():
    assert Config.get_tolerances() == (Config.BOUNDARY_TOL, Config.AREA_TOL, Config.PLATEAU_TOL)


def test_load_json_resource():
    assert get_data_file_path('shape.defs.json').exists()
    assert load_json_resource('shape.defs.json')['$id'] == 'shape.defs.json'
