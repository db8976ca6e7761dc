"""Tests for the seeded multigraph sampler."""

import logging

import numpy as np
import pytest
import scipy.stats

from community_spectra.model import build_model, build_two_community_model, with_n
from community_spectra.models import ParamAtom
from community_spectra.sampling.generator import (
    block_mean,
    degree_stats,
    expected_edge_count,
    sample_graph,
)


@pytest.fixture
def sparse_model():
    return build_model([ParamAtom(k=(10.0,), weight=1.0)], 2000)


def test_same_seed_same_graph(two_value_model):
    first = sample_graph(two_value_model, seed=3)
    second = sample_graph(two_value_model, seed=3)
    np.testing.assert_array_equal(first.edges, second.edges)


def test_result_independent_of_thread_count(two_value_model):
    serial = sample_graph(two_value_model, seed=11, threads=1)
    pooled = sample_graph(two_value_model, seed=11, threads=4)
    np.testing.assert_array_equal(serial.edges, pooled.edges)


def test_different_seeds_differ(sparse_model):
    assert not np.array_equal(sample_graph(sparse_model, 1).edges, sample_graph(sparse_model, 2).edges)


def test_edge_rows_are_canonical(two_value_model):
    edges = sample_graph(two_value_model, seed=5).edges
    assert np.all(edges[:, 0] < edges[:, 1])
    assert np.all(edges[:, 2] >= 1)
    keys = edges[:, 0] * two_value_model.n + edges[:, 1]
    assert np.all(np.diff(keys) > 0)


def test_adjacency_is_symmetric_without_self_loops(sparse_model):
    adjacency = sample_graph(sparse_model, seed=0).adjacency()
    assert (adjacency - adjacency.T).nnz == 0
    assert adjacency.diagonal().sum() == 0


def test_mean_degree_close_to_c(sparse_model):
    graph = sample_graph(sparse_model, seed=7)
    assert graph.degrees().mean() == pytest.approx(10.0, abs=0.4)


def test_expected_edge_count_single_atom(sparse_model):
    # n(n-1)/2 pairs with mean c/n each
    assert expected_edge_count(sparse_model) == pytest.approx(1999 * 10.0 / 2)


def test_block_mean_between_communities(sbm_model):
    counts = np.array([500, 500])
    # (100, 50).(100, -50) = 7500 over 2m = 100000
    assert block_mean(sbm_model, counts, 0, 1) == pytest.approx(500 * 500 * 7500 / 100000)


def test_degree_stats_follow_kappa(two_value_model):
    graph = sample_graph(with_n(two_value_model, 2000), seed=2)
    means = {s.label: s.mean for s in degree_stats(graph)}
    for label, kappa in ((0, 60.0), (1, 120.0), (2, 60.0), (3, 120.0)):
        assert means[label] == pytest.approx(kappa, rel=0.05)


def test_degree_means_do_not_depend_on_theta():
    means = []
    for theta in (0.0, 25.0, 50.0):
        model = build_two_community_model([(60.0, 0.5), (120.0, 0.5)], theta, 2000)
        graph = sample_graph(model, seed=4)
        means.append(graph.degrees().mean())
    assert max(means) - min(means) < 1.5


def test_planted_communities(two_value_model):
    graph = sample_graph(two_value_model, seed=0)
    assert list(np.bincount(graph.labels)) == [250, 250, 250, 250]
    communities = graph.communities
    assert np.all(communities[:500] == 0)
    assert np.all(communities[500:] == 1)


def test_negative_seed_rejected(sparse_model):
    with pytest.raises(ValueError):
        sample_graph(sparse_model, seed=-1)


def _block_pair_totals(graph) -> np.ndarray:
    first = graph.labels[graph.edges[:, 0]]
    second = graph.labels[graph.edges[:, 1]]
    totals = np.zeros((2, 2), dtype=np.int64)
    np.add.at(totals, (np.minimum(first, second), np.maximum(first, second)), graph.edges[:, 2])
    return totals[np.triu_indices(2)]


def _poisson_p_value(totals: np.ndarray, mean: float) -> float:
    # pool the upper tail so every expected count is at least 5
    upper = int(scipy.stats.poisson.isf(5.0 / len(totals), mean))
    observed = np.bincount(np.minimum(totals, upper), minlength=upper + 1)
    expected = scipy.stats.poisson.pmf(np.arange(upper + 1), mean) * len(totals)
    expected[-1] = scipy.stats.poisson.sf(upper - 1, mean) * len(totals)
    return float(scipy.stats.chisquare(observed, expected).pvalue)


@pytest.mark.parametrize('samples', [4000, pytest.param(100_000, marks=pytest.mark.slow)])
def test_block_pair_edge_counts_are_poisson(caplog, samples):
    caplog.set_level(logging.WARNING, logger='community_spectra.sampling.generator')
    model = build_model([ParamAtom(k=(3.0,), weight=0.5), ParamAtom(k=(6.0,), weight=0.5)], 6)
    counts = np.array([3, 3])
    # 2m = 27: 3 pairs * 9, 9 pairs * 18 and 3 pairs * 36, all over 27
    means = [block_mean(model, counts, a, b) for a, b in ((0, 0), (0, 1), (1, 1))]
    assert means == pytest.approx([1.0, 6.0, 4.0])

    totals = np.array([_block_pair_totals(sample_graph(model, seed)) for seed in range(samples)])
    for column, mean in enumerate(means):
        assert totals[:, column].mean() == pytest.approx(mean, rel=0.05)
        assert _poisson_p_value(totals[:, column], mean) > 1e-3
