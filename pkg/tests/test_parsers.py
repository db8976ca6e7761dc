"""Tests for model config files and graph files."""

import json
import math

import numpy as np
import pytest

from community_spectra.errors import ConfigError, ModelError, WeightSum
from community_spectra.model import rank_structure
from community_spectra.parsers.graph_file import (
    read_graph,
    sidecar_path,
    write_columns,
    write_graph,
)
from community_spectra.parsers.model_config import (
    load_model_config,
    parse_model_config,
    simplex_parameters,
    two_community_kappas,
)
from community_spectra.sampling.generator import sample_graph


def test_atoms_form():
    model = parse_model_config({
        'n': 50,
        'atoms': [
            {'k': [10, 2], 'weight': 0.5, 'group': 0},
            {'k': [10, -2], 'weight': 0.5, 'group': 1},
        ],
    })
    assert model.n == 50
    assert model.q == 2
    assert model.c == pytest.approx(10.0)
    assert list(model.groups) == [0, 1]


def test_scalar_k_is_one_dimensional():
    model = parse_model_config({'n': 10, 'atoms': [{'k': 100, 'weight': 1.0}]})
    assert model.q == 1


def test_two_community_form(two_value_config):
    model = parse_model_config(two_value_config)
    assert model.c == pytest.approx(90.0)
    assert rank_structure(model).alphas == pytest.approx((100.0, 2500.0 / 90.0))


def test_simplex_form_accepts_degrees():
    radians = parse_model_config({'n': 30, 'simplex': {'q': 3, 'phi': math.pi / 3, 'magnitudes': [100]}})
    degrees = parse_model_config({'n': 30, 'simplex': {'q': 3, 'phi_degrees': 60, 'magnitudes': [100]}})
    np.testing.assert_allclose(radians.vectors, degrees.vectors, atol=1e-12)


def test_n_override(sbm_config):
    assert parse_model_config(sbm_config, n=4000).n == 4000


@pytest.mark.parametrize('config', [
    [],
    {'n': 10},
    {'n': 10, 'atoms': [{'k': 1, 'weight': 1}], 'simplex': {}},
    {'n': 10, 'atoms': [{'k': 1, 'weight': 1}], 'seed': 3},
    {'n': 0, 'atoms': [{'k': 1, 'weight': 1}]},
    {'n': 10, 'atoms': [{'k': 'a', 'weight': 1}]},
    {'n': 10, 'atoms': [{'k': 1}]},
    {'n': 10, 'two_community': {'kappas': [100], 'theta': 5}},
    {'n': 10, 'simplex': {'q': 3, 'magnitudes': [1]}},
])
def test_malformed_configs(config):
    with pytest.raises(ConfigError):
        parse_model_config(config)


def test_model_constraints_surface_as_model_errors():
    with pytest.raises(WeightSum):
        parse_model_config({'n': 10, 'atoms': [{'k': 1, 'weight': 0.9}]})
    with pytest.raises(ModelError):
        parse_model_config({'n': 10, 'two_community': {'kappas': [{'kappa': 10, 'weight': 1}], 'theta': 20}})


def test_load_missing_and_invalid_files(tmp_path):
    with pytest.raises(ConfigError):
        load_model_config(tmp_path / 'absent.json')
    broken = tmp_path / 'broken.json'
    broken.write_text('{"n": 10,')
    with pytest.raises(ConfigError):
        load_model_config(broken)


def test_load_returns_raw_config(write_model, sbm_config):
    model, config = load_model_config(write_model(sbm_config))
    assert config == sbm_config
    assert two_community_kappas(config) == [(100.0, 1.0)]
    assert model.n == 1000


def test_simplex_parameters():
    config = {'n': 30, 'simplex': {'q': 3, 'phi': 1.0, 'magnitudes': [50, {'k': 100, 'weight': 0.5}]}}
    assert simplex_parameters(config) == (3, [(50.0, 0.5), (100.0, 0.5)])
    with pytest.raises(ConfigError):
        two_community_kappas(config)


def test_graph_file_roundtrip(tmp_path, two_value_model):
    graph = sample_graph(two_value_model, seed=9)
    path = tmp_path / 'graph.csv'
    side = write_graph(graph, path)
    assert side == sidecar_path(path)
    assert path.read_text().splitlines()[0] == 'i,j,multiplicity'

    loaded = read_graph(path)
    assert loaded.n == graph.n
    assert loaded.seed == 9
    np.testing.assert_array_equal(loaded.edges, graph.edges)
    np.testing.assert_array_equal(loaded.communities, graph.communities)


def test_graph_without_sidecar(tmp_path):
    path = tmp_path / 'plain.csv'
    path.write_text('i,j,multiplicity\n3,1,2\n0,1,1\n')
    graph = read_graph(path)
    assert graph.n == 4
    assert graph.edges.tolist() == [[0, 1, 1], [1, 3, 2]]
    assert graph.num_edges == 3


@pytest.mark.parametrize('body', [
    'a,b,c\n0,1,1\n',
    'i,j,multiplicity\n1,1,1\n',
    'i,j,multiplicity\n0,1,0\n',
    'i,j,multiplicity\n0,x,1\n',
])
def test_bad_graph_files(tmp_path, body):
    path = tmp_path / 'bad.csv'
    path.write_text(body)
    with pytest.raises(ConfigError):
        read_graph(path)


def test_sidecar_must_cover_vertex_ids(tmp_path):
    path = tmp_path / 'graph.csv'
    path.write_text('i,j,multiplicity\n0,5,1\n')
    sidecar_path(path).write_text(json.dumps({'n': 3, 'seed': 0, 'labels': [0, 0, 0]}))
    with pytest.raises(ConfigError):
        read_graph(path)


def test_write_columns_formats_cells(tmp_path):
    path = tmp_path / 'out.csv'
    write_columns(path, {'r': np.array([1, 2]), 'z': [101.0, 0.5], 'visible': [True, False]})
    assert path.read_text().splitlines() == ['r,z,visible', '1,101.0,true', '2,0.5,false']
