"""Combined theory report: band, density, outliers."""

import logging
from typing import Optional

from community_spectra.model import rank_structure
from community_spectra.models import ModelSpec, SolverOptions, SpectrumReport
from community_spectra.theory.outliers import outlier_eigenvalues
from community_spectra.theory.resolvent import density_curve, find_band_edges

logger = logging.getLogger(__name__)

DEFAULT_POINTS = 2001
GRID_MARGIN = 0.1
# default broadening relative to the band width
EPSILON_FRACTION = 1e-4


def default_epsilon(width: float) -> float:
    """Broadening used when none is given: 1e-4 of the band width."""
    return EPSILON_FRACTION * width


def spectrum_report(
    model: ModelSpec,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    points: int = DEFAULT_POINTS,
    epsilon: Optional[float] = None,
    threads: int = 0,
    opts: Optional[SolverOptions] = None
) -> SpectrumReport:
    """Band, density curve and outlier report for one model.

    The density grid defaults to the band padded by 10% of its width on
    both sides.

    Args:
        model: Validated model
        lo: Grid start
        hi: Grid end
        points: Grid points
        epsilon: Broadening
        threads: Worker count
        opts: Solver configuration

    Returns:
        SpectrumReport
    """
    opts = opts or SolverOptions()
    band = find_band_edges(model, threads=threads, opts=opts)
    margin = GRID_MARGIN * band.width
    lo = band.lower - margin if lo is None else lo
    hi = band.upper + margin if hi is None else hi
    epsilon = default_epsilon(band.width) if epsilon is None else epsilon

    logger.info(f"Spectrum report: grid [{lo:.6g}, {hi:.6g}] x {points}, eps={epsilon:g}")
    density = density_curve(model, lo, hi, points, epsilon, threads, opts)
    outliers = outlier_eigenvalues(model, band, opts)
    return SpectrumReport(
        model=model,
        alphas=rank_structure(model).alphas,
        density=density,
        band=band,
        outliers=outliers
    )
