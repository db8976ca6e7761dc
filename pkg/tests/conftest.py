"""Shared model fixtures."""

import json

import pytest

from community_spectra.model import build_model, build_two_community_model
from community_spectra.models import ParamAtom


@pytest.fixture
def semicircle_model():
    """Single atom k = 100: every vertex has degree 100, band [-20, 20]."""
    return build_model([ParamAtom(k=(100.0,), weight=1.0)], 1000)


@pytest.fixture
def sbm_model():
    """Constant-degree two-community model, c = 100, theta = 50."""
    return build_two_community_model([(100.0, 1.0)], 50.0, 1000)


@pytest.fixture
def two_value_model():
    """Half the vertices with kappa = 60, half with 120, theta = 50 (c = 90)."""
    return build_two_community_model([(60.0, 0.5), (120.0, 0.5)], 50.0, 1000)


@pytest.fixture
def write_model(tmp_path):
    """Write a model config dict to a JSON file and return its path."""
    def _write(config, name='model.json'):
        path = tmp_path / name
        path.write_text(json.dumps(config))
        return path
    return _write


@pytest.fixture
def sbm_config():
    return {
        'n': 1000,
        'name': 'sbm',
        'two_community': {'kappas': [{'kappa': 100, 'weight': 1.0}], 'theta': 50},
    }


@pytest.fixture
def two_value_config():
    return {
        'n': 1000,
        'two_community': {
            'kappas': [{'kappa': 60, 'weight': 0.5}, {'kappa': 120, 'weight': 0.5}],
            'theta': 50,
        },
    }
