"""Empirical spectra of sampled graphs and spectral community recovery."""

import logging
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.cluster.vq
import scipy.optimize
import scipy.sparse.linalg

from community_spectra.errors import ConfigError, IterativeNoConvergence
from community_spectra.model import expected_adjacency, with_n
from community_spectra.models import (
    ComparisonResult,
    DensityCurve,
    EmpiricalSpectrum,
    Histogram,
    ModelSpec,
    RecoveryResult,
    SampledGraph,
    SpectrumReport,
)
from community_spectra.sampling.generator import sample_graph
from community_spectra.utils import parallel_map, relative_error

logger = logging.getLogger(__name__)

DENSE_LIMIT = 5000
DEFAULT_BINS = 50
RESIDUAL_TOL = 1e-8
EDGE_MARGIN = 0.02
BIN_SUBSAMPLES = 16
INTERLACING_LIMIT = 200


def parse_mode(mode: str) -> tuple[str, Optional[int]]:
    """Parse 'full' or 'topk:K'."""
    if mode == 'full':
        return 'full', None
    if mode.startswith('topk:'):
        try:
            k = int(mode.split(':', 1)[1])
        except ValueError:
            raise ConfigError(f"bad eigen mode '{mode}', expected topk:K")
        if k < 1:
            raise ConfigError(f"topk needs K >= 1, got {k}")
        return 'topk', k
    raise ConfigError(f"unknown eigen mode '{mode}', expected full or topk:K")


def _starting_vector(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(n)


def top_eigenpairs(graph: SampledGraph, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Largest-algebraic eigenpairs of the adjacency matrix, descending.

    Raises:
        IterativeNoConvergence: If ARPACK fails or a residual exceeds
            1e-8 times the spectral norm estimate
    """
    adjacency = graph.adjacency()
    if k >= graph.n - 1:
        values, vectors = np.linalg.eigh(adjacency.toarray())
        order = np.argsort(values)[::-1][:k]
        return values[order], vectors[:, order]

    try:
        values, vectors = scipy.sparse.linalg.eigsh(
            adjacency, k=k, which='LA', v0=_starting_vector(graph.n, graph.seed)
        )
    except scipy.sparse.linalg.ArpackNoConvergence as e:
        residuals = [
            float(np.linalg.norm(adjacency @ v - lam * v))
            for lam, v in zip(e.eigenvalues, e.eigenvectors.T)
        ]
        raise IterativeNoConvergence(residuals, str(e))

    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    norm = max(float(np.max(np.abs(values))), 1.0)
    residuals = [
        float(np.linalg.norm(adjacency @ vectors[:, i] - values[i] * vectors[:, i]))
        for i in range(k)
    ]
    if max(residuals) > RESIDUAL_TOL * norm:
        raise IterativeNoConvergence(residuals, f"residual above {RESIDUAL_TOL:g} x |A|")
    return values, vectors


def eigen_spectrum(
    graph: SampledGraph,
    mode: str = 'full',
    dense_limit: int = DENSE_LIMIT
) -> EmpiricalSpectrum:
    """Eigenvalues of the adjacency matrix, sorted descending.

    Args:
        graph: Sampled graph
        mode: 'full' (dense, n <= dense_limit) or 'topk:K' (sparse Lanczos)
        dense_limit: Largest n diagonalized densely

    Returns:
        EmpiricalSpectrum
    """
    kind, k = parse_mode(mode)
    if kind == 'full':
        if graph.n > dense_limit:
            raise ConfigError(
                f"full diagonalization is limited to n <= {dense_limit}, got n={graph.n}; use topk:K"
            )
        values = np.linalg.eigvalsh(graph.adjacency().toarray())[::-1]
        logger.info(f"Dense spectrum: n={graph.n}, top={values[0]:.6g}")
    else:
        values, _ = top_eigenpairs(graph, k)
        logger.info(f"Top-{k} spectrum: n={graph.n}, top={values[0]:.6g}")
    return EmpiricalSpectrum(eigenvalues=np.asarray(values), n=graph.n, seed=graph.seed, mode=mode)


def centered_matrix(graph: SampledGraph, model: ModelSpec) -> np.ndarray:
    """Dense X = A - <A> with zero diagonal."""
    return graph.adjacency().toarray() - expected_adjacency(model, graph.n, zero_diagonal=True)


def centered_spectrum(
    graph: SampledGraph,
    model: ModelSpec,
    dense_limit: int = DENSE_LIMIT
) -> EmpiricalSpectrum:
    """Eigenvalues of the centered matrix X, sorted descending."""
    if graph.n > dense_limit:
        raise ConfigError(f"centered spectrum is limited to n <= {dense_limit}, got n={graph.n}")
    values = np.linalg.eigvalsh(centered_matrix(graph, model))[::-1]
    return EmpiricalSpectrum(eigenvalues=values, n=graph.n, seed=graph.seed, mode='centered')


def spectral_histogram(
    spectrum: EmpiricalSpectrum,
    bins: int = DEFAULT_BINS,
    exclude_top: int = 0,
    value_range: Optional[tuple[float, float]] = None
) -> Histogram:
    """Density-normalized histogram without the top `exclude_top` eigenvalues."""
    if bins < 10:
        raise ValueError(f"bins must be >= 10, got {bins}")
    if exclude_top < 0:
        raise ValueError(f"exclude_top must be >= 0, got {exclude_top}")
    values = np.sort(np.asarray(spectrum.eigenvalues))[::-1][exclude_top:]
    if len(values) == 0:
        raise ValueError("no eigenvalues left after excluding the top ones")
    density, edges = np.histogram(values, bins=bins, range=value_range, density=True)
    return Histogram(edges=edges, density=density, excluded=exclude_top)


TheoryDensity = Union[DensityCurve, Callable[[np.ndarray], np.ndarray]]


def _theory_function(theory: TheoryDensity) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(theory, DensityCurve):
        return theory.interpolate
    return lambda x: np.asarray(theory(x), dtype=float)


def l1_distance(histogram: Histogram, theory: TheoryDensity) -> float:
    """Sum over bins of |histogram - bin-averaged theory| times bin width."""
    density = _theory_function(theory)
    offsets = (np.arange(BIN_SUBSAMPLES) + 0.5) / BIN_SUBSAMPLES
    samples = histogram.edges[:-1, None] + histogram.widths[:, None] * offsets[None, :]
    averaged = density(samples.ravel()).reshape(samples.shape).mean(axis=1)
    return float(np.sum(np.abs(histogram.density - averaged) * histogram.widths))


def recovery_accuracy(assignments: np.ndarray, planted: np.ndarray) -> float:
    """Fraction classified correctly, maximized over relabelings."""
    found_labels, found = np.unique(assignments, return_inverse=True)
    planted_labels, truth = np.unique(planted, return_inverse=True)
    confusion = np.zeros((len(found_labels), len(planted_labels)), dtype=np.int64)
    np.add.at(confusion, (found, truth), 1)
    rows, cols = scipy.optimize.linear_sum_assignment(confusion, maximize=True)
    return float(confusion[rows, cols].sum()) / len(planted)


def detect_communities(graph: SampledGraph, q: int = 2, seed: int = 0) -> RecoveryResult:
    """Spectral community recovery from the leading eigenvectors.

    q = 2 splits vertices by the sign of the eigenvector of the second
    largest eigenvalue; q > 2 runs k-means on the rows of the top-q
    eigenvector matrix.
    """
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    _, vectors = top_eigenpairs(graph, q)
    if q == 2:
        assignments = (vectors[:, 1] > 0).astype(np.int64)
    else:
        _, assignments = scipy.cluster.vq.kmeans2(
            vectors, q, minit='++', seed=np.random.default_rng(seed)
        )
    accuracy = recovery_accuracy(assignments, graph.communities)
    logger.info(f"Community recovery q={q}: accuracy={accuracy:.4f}")
    return RecoveryResult(accuracy=accuracy, assignments=np.asarray(assignments), q=q)


def recovery_ensemble(
    model: ModelSpec,
    seeds: Sequence[int],
    q: int = 2,
    threads: int = 0
) -> list[RecoveryResult]:
    """detect_communities on one sample per seed, run concurrently."""
    return parallel_map(
        lambda seed: detect_communities(sample_graph(model, seed), q, seed),
        seeds,
        threads
    )


def interlacing_check(
    n_small: int,
    model: ModelSpec,
    alpha: float,
    seed: int,
    tol: float = 1e-9
) -> bool:
    """Check that X and X + alpha u u^T interlace.

    X is the centered matrix of a sample at n_small vertices and u the
    normalized all-ones vector.  For alpha >= 0 the perturbed eigenvalues z
    satisfy z_1 >= l_1 >= z_2 >= l_2 >= ...; negative alpha swaps the roles.
    """
    if n_small > INTERLACING_LIMIT:
        raise ValueError(f"interlacing check is limited to n <= {INTERLACING_LIMIT}")
    small = with_n(model, n_small)
    centered = centered_matrix(sample_graph(small, seed), small)
    u = np.ones(n_small) / np.sqrt(n_small)
    perturbed = centered + alpha * np.outer(u, u)

    base = np.linalg.eigvalsh(centered)[::-1]
    shifted = np.linalg.eigvalsh(perturbed)[::-1]
    upper, lower = (shifted, base) if alpha >= 0 else (base, shifted)
    slack = tol * max(1.0, float(np.max(np.abs(np.r_[base, shifted]))))
    holds = bool(
        np.all(upper >= lower - slack)
        and np.all(lower[:-1] >= upper[1:] - slack)
    )
    if not holds:
        logger.error(f"Interlacing violated for n={n_small}, alpha={alpha}, seed={seed}")
    return holds


def compare(
    report: SpectrumReport,
    spectrum: EmpiricalSpectrum,
    bins: int = DEFAULT_BINS,
    exclude_top: Optional[int] = None,
    histogram_source: Optional[EmpiricalSpectrum] = None
) -> tuple[ComparisonResult, Histogram]:
    """Score an empirical spectrum against the theory report.

    Args:
        report: Theory for the sampled model
        spectrum: Full adjacency spectrum of a sample
        bins: Histogram bins
        exclude_top: Top eigenvalues left out of the histogram (default q)
        histogram_source: Spectrum to histogram instead, e.g. the centered
            one, with nothing excluded

    Returns:
        (ComparisonResult, Histogram used for the L1 distance)
    """
    if not spectrum.complete:
        raise ConfigError("comparison needs the full spectrum")
    if histogram_source is not None:
        histogram = spectral_histogram(histogram_source, bins, 0)
    else:
        excluded = report.model.q if exclude_top is None else exclude_top
        histogram = spectral_histogram(spectrum, bins, excluded)
    distance = l1_distance(histogram, report.density)

    eigenvalues = np.sort(spectrum.eigenvalues)[::-1]
    visible = report.outliers.visible
    errors = tuple(
        relative_error(float(eigenvalues[idx]), entry.z)
        for idx, entry in enumerate(visible)
    )
    edge = report.band.upper
    above = int(np.sum(eigenvalues > edge + EDGE_MARGIN * abs(edge)))

    result = ComparisonResult(
        l1_distance=distance,
        outlier_errors=errors,
        count_above_edge=above,
        expected_visible=len(visible)
    )
    logger.info(f"Comparison: L1={distance:.4f}, outlier errors={errors}, above edge={above}")
    return result, histogram
