"""Tests for the combined theory report."""

import pytest

from community_spectra.theory.report import default_epsilon, spectrum_report


def test_default_epsilon_follows_band_width():
    assert default_epsilon(40.0) == pytest.approx(4e-3)


def test_sbm_report(sbm_model):
    report = spectrum_report(sbm_model, points=401, threads=2)
    assert report.alphas == pytest.approx((100.0, 25.0))
    assert report.density.epsilon == pytest.approx(default_epsilon(report.band.width))
    assert report.density.xs[0] < report.band.lower
    assert report.density.xs[-1] > report.band.upper
    assert report.density.integral() == pytest.approx(1.0, abs=2e-2)
    assert report.outliers.num_visible == 2

    document = report.to_dict()
    assert document['visible'] == 2
    assert [entry['z'] for entry in document['outliers']] == pytest.approx([101.0, 29.0], rel=1e-8)
    assert document['c'] == pytest.approx(100.0)


def test_explicit_grid(semicircle_model):
    report = spectrum_report(semicircle_model, lo=-5.0, hi=5.0, points=11, epsilon=1e-3, threads=1)
    assert report.density.xs[0] == -5.0
    assert len(report.density.xs) == 11
    assert report.density.epsilon == 1e-3
