"""Tests for empirical spectra, histograms, community recovery and comparisons."""

import math

import numpy as np
import pytest

from community_spectra.errors import ConfigError
from community_spectra.model import build_model, build_simplex_model, build_two_community_model, with_n
from community_spectra.models import EmpiricalSpectrum, ParamAtom
from community_spectra.sampling.empirical import (
    EDGE_MARGIN,
    centered_spectrum,
    compare,
    detect_communities,
    eigen_spectrum,
    interlacing_check,
    l1_distance,
    parse_mode,
    recovery_accuracy,
    recovery_ensemble,
    spectral_histogram,
)
from community_spectra.sampling.generator import sample_graph
from community_spectra.theory.closedform import semicircle_density, two_value_density
from community_spectra.theory.outliers import outlier_eigenvalues
from community_spectra.theory.report import spectrum_report
from community_spectra.theory.resolvent import find_band_edges


@pytest.fixture
def small_graph():
    model = build_model([ParamAtom(k=(20.0,), weight=1.0)], 300)
    return sample_graph(model, seed=1)


def test_parse_mode():
    assert parse_mode('full') == ('full', None)
    assert parse_mode('topk:4') == ('topk', 4)
    for bad in ('topk:0', 'topk:x', 'lanczos'):
        with pytest.raises(ConfigError):
            parse_mode(bad)


def test_full_spectrum_sorted_descending(small_graph):
    spectrum = eigen_spectrum(small_graph)
    assert spectrum.complete
    assert np.all(np.diff(spectrum.eigenvalues) <= 0)
    # trace of A is zero without self-loops
    assert spectrum.eigenvalues.sum() == pytest.approx(0.0, abs=1e-8)


def test_trace_of_square_counts_multiplicities(small_graph):
    # tr A^2 = sum_ij A_ij^2 = 2 sum m^2 over the stored i < j rows
    eigenvalues = eigen_spectrum(small_graph).eigenvalues
    multiplicities = small_graph.edges[:, 2].astype(float)
    assert np.sum(eigenvalues ** 2) == pytest.approx(2.0 * np.sum(multiplicities ** 2), rel=1e-9)


def test_top_k_matches_dense(small_graph):
    dense = eigen_spectrum(small_graph).eigenvalues
    top = eigen_spectrum(small_graph, 'topk:3')
    assert not top.complete
    np.testing.assert_allclose(top.eigenvalues, dense[:3], rtol=1e-8)


def test_dense_limit_enforced(small_graph):
    with pytest.raises(ConfigError):
        eigen_spectrum(small_graph, 'full', dense_limit=100)


def test_histogram_is_a_density():
    spectrum = EmpiricalSpectrum(eigenvalues=np.linspace(10.0, -10.0, 400), n=400, seed=0)
    histogram = spectral_histogram(spectrum, bins=20, exclude_top=2)
    assert np.sum(histogram.density * histogram.widths) == pytest.approx(1.0)
    assert histogram.excluded == 2
    assert histogram.edges[-1] < 10.0


def test_histogram_arguments_checked():
    spectrum = EmpiricalSpectrum(eigenvalues=np.arange(5.0), n=5, seed=0)
    with pytest.raises(ValueError):
        spectral_histogram(spectrum, bins=5)
    with pytest.raises(ValueError):
        spectral_histogram(spectrum, bins=10, exclude_top=5)


def test_l1_distance_of_exact_uniform_is_small():
    spectrum = EmpiricalSpectrum(eigenvalues=np.linspace(-1.0, 1.0, 20001), n=20001, seed=0)
    histogram = spectral_histogram(spectrum, bins=20)
    uniform = lambda x: np.where(np.abs(x) <= 1.0, 0.5, 0.0)
    assert l1_distance(histogram, uniform) < 2e-3


def test_recovery_accuracy_maximizes_over_relabelings():
    assert recovery_accuracy(np.array([1, 1, 0, 0]), np.array([0, 0, 1, 1])) == 1.0
    assert recovery_accuracy(np.array([2, 0, 1, 1]), np.array([0, 1, 2, 2])) == 1.0
    assert recovery_accuracy(np.array([0, 1, 0, 1]), np.array([0, 0, 1, 1])) == 0.5


def test_strong_communities_recovered():
    model = build_two_community_model([(100.0, 1.0)], 80.0, 1000)
    result = detect_communities(sample_graph(model, seed=3), q=2)
    assert result.accuracy > 0.9
    assert len(result.assignments) == 1000


def test_undetectable_communities_near_chance():
    model = build_two_community_model([(100.0, 1.0)], 10.0, 1000)
    result = detect_communities(sample_graph(model, seed=3), q=2)
    assert result.accuracy < 0.65


def test_three_way_recovery_with_kmeans():
    model = build_simplex_model(3, math.pi / 2, [(100.0, 1.0)], 600)
    result = detect_communities(sample_graph(model, seed=0), q=3, seed=0)
    assert result.accuracy > 0.9


def test_recovery_ensemble_one_result_per_seed():
    model = build_two_community_model([(100.0, 1.0)], 80.0, 400)
    results = recovery_ensemble(model, [0, 1, 2], q=2, threads=2)
    assert len(results) == 3
    assert all(r.accuracy > 0.8 for r in results)


@pytest.mark.parametrize('seed', range(5))
@pytest.mark.parametrize('alpha', [5.0, -5.0, 1e3])
def test_rank_one_interlacing(two_value_model, alpha, seed):
    assert interlacing_check(100, two_value_model, alpha, seed)


def test_interlacing_limited_to_small_n(two_value_model):
    with pytest.raises(ValueError):
        interlacing_check(500, two_value_model, 5.0, 0)


def test_centered_spectrum_removes_outliers(sbm_model):
    small = with_n(sbm_model, 800)
    graph = sample_graph(small, seed=2)
    centered = centered_spectrum(graph, small)
    assert len(centered.eigenvalues) == 800
    assert eigen_spectrum(graph).eigenvalues[0] > 90.0
    assert centered.eigenvalues[0] < 25.0


def test_compare_semicircle_sample(sbm_model):
    model = with_n(sbm_model, 2000)
    report = spectrum_report(model, points=401, threads=2)
    graph = sample_graph(model, seed=5)
    result, histogram = compare(report, eigen_spectrum(graph))
    assert histogram.excluded == 2
    assert result.expected_visible == 2
    assert result.count_above_edge == 2
    assert all(err < 0.03 for err in result.outlier_errors)
    assert result.l1_distance < 0.15


def test_compare_needs_full_spectrum(sbm_model, small_graph):
    report = spectrum_report(sbm_model, points=201, threads=2)
    with pytest.raises(ConfigError):
        compare(report, eigen_spectrum(small_graph, 'topk:2'))


@pytest.mark.slow
def test_semicircle_sample_at_desk_scale(sbm_model):
    model = with_n(sbm_model, 4000)
    graph = sample_graph(model, seed=0, threads=0)
    histogram = spectral_histogram(eigen_spectrum(graph), bins=50, exclude_top=2)
    assert l1_distance(histogram, lambda x: semicircle_density(x, 100.0)) <= 0.05


@pytest.mark.slow
def test_two_value_acceptance_at_desk_scale(two_value_model):
    model = with_n(two_value_model, 4000)
    report = spectrum_report(model, threads=0)
    graph = sample_graph(model, seed=0, threads=0)
    result, histogram = compare(report, eigen_spectrum(graph))
    assert result.passed, result.failures
    assert l1_distance(histogram, lambda x: two_value_density(x, 60.0, 120.0)) <= 0.05
    assert detect_communities(graph, q=2).accuracy >= 0.95


def _two_value_family(theta: float):
    return build_two_community_model([(60.0, 0.5), (120.0, 0.5)], theta, 4000)


@pytest.mark.slow
@pytest.mark.parametrize('theta, num_seeds, lowest, highest', [
    (50.0, 5, 0.95, 1.0),
    (10.0, 5, 0.5, 0.6),
    (0.0, 10, 0.47, 0.53),
])
def test_recovery_across_the_detectability_threshold(theta, num_seeds, lowest, highest):
    results = recovery_ensemble(_two_value_family(theta), list(range(num_seeds)), q=2, threads=0)
    mean = float(np.mean([r.accuracy for r in results]))
    assert lowest <= mean <= highest


@pytest.mark.slow
@pytest.mark.parametrize('theta, visible', [(40.0, 2), (20.0, 1)])
def test_eigenvalues_above_edge_match_visible_outliers(theta, visible):
    model = _two_value_family(theta)
    band = find_band_edges(model, threads=0)
    assert outlier_eigenvalues(model, band, threads=0).num_visible == visible

    threshold = band.upper + EDGE_MARGIN * abs(band.upper)
    votes = []
    for seed in range(5):
        top = eigen_spectrum(sample_graph(model, seed, threads=0), 'topk:4').eigenvalues
        votes.append(int(np.sum(top > threshold)))
    assert sorted(votes)[2] == visible, votes
