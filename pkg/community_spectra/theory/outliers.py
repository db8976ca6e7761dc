"""Outlying eigenvalues, the band-edge value g_max and detectability thresholds.

Outliers solve g(z) = 1/alpha_r on the real axis above the band.  Real g is
strictly decreasing there and reaches its largest value g_max at the upper
edge, so alpha_r produces an outlier exactly when alpha_r g_max > 1.
"""

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.optimize

from community_spectra.errors import BracketFailure, SolverError
from community_spectra.model import (
    build_simplex_model,
    build_two_community_model,
    rank_structure,
)
from community_spectra.models import (
    Band,
    BandEdge,
    ModelSpec,
    OutlierEntry,
    OutlierReport,
    SolverOptions,
    Transition,
)
from community_spectra.theory.resolvent import (
    direct_g,
    find_band_edges,
    fixed_point_jacobian,
    fixed_point_map,
    solve_h_real,
)
from community_spectra.utils import parallel_map

logger = logging.getLogger(__name__)

MARGINAL_BAND = 1e-6
DEGENERACY_TOL = 1e-9
G_MAX_LADDER = (1e-2, 1e-3, 1e-4)
FOLD_START_OFFSETS = (1e-3, 1e-2, 1e-1, 1.0)
FOLD_TOLERANCE = 1e-2
BRACKET_EXPANSIONS = 60


class RealG:
    """Real g(x) above the band with warm starts from already solved points.

    A solution at x' >= x lies below h(x) on the physical branch, which keeps
    the iteration on that branch, so only such points are reused.
    """

    def __init__(self, model: ModelSpec, opts: Optional[SolverOptions] = None):
        self.model = model
        self.opts = opts or SolverOptions()
        self.solved: dict[float, np.ndarray] = {}

    def solution(self, x: float):
        above = [key for key in self.solved if key >= x]
        warm = self.solved[min(above)] if above else None
        solution = solve_h_real(x, self.model, warm, self.opts)
        self.solved[float(x)] = solution.h
        return solution

    def __call__(self, x: float) -> float:
        solution = self.solution(x)
        return direct_g(solution.h, x, self.model).real


def real_g(x: float, model: ModelSpec, opts: Optional[SolverOptions] = None) -> float:
    """g on the real axis outside the band."""
    return RealG(model, opts)(x)


def refine_upper_edge(
    model: ModelSpec,
    band: Band,
    opts: Optional[SolverOptions] = None
) -> BandEdge:
    """Upper band edge as the fold point of the real fixed-point equation.

    Solves h - F(h, z) = 0 together with 1 - lambda_max(dF/dh) = 0 for
    (h, z), starting from the real solution just above band.upper.  Falls
    back to band.upper when the joint solve does not land near it.
    """
    opts = opts or SolverOptions()
    root_c = math.sqrt(model.c)
    evaluator = RealG(model, opts)

    start = None
    for factor in reversed(FOLD_START_OFFSETS):
        x = band.upper + factor * root_c
        try:
            start = (x, evaluator.solution(x).h)
        except SolverError as e:
            logger.debug(f"No real solution at {x:.8g}: {e}")
            break
    if start is None:
        raise SolverError(f"no real solution above the band edge {band.upper:.8g}")

    q = model.q

    def equations(v: np.ndarray) -> np.ndarray:
        h, z = v[:q], v[q]
        defect = h - fixed_point_map(h, z, model)
        leading = np.linalg.eigvalsh(fixed_point_jacobian(h, z, model))[-1]
        return np.r_[defect, 1.0 - leading]

    x0, h0 = start
    result = scipy.optimize.root(equations, np.r_[h0, x0], method='hybr', options={'xtol': 1e-14})
    z_fold = float(result.x[q])
    h_fold = np.asarray(result.x[:q], dtype=float)
    if result.success and abs(z_fold - band.upper) <= FOLD_TOLERANCE * root_c:
        g_fold = direct_g(h_fold, z_fold, model).real
        logger.debug(f"Fold edge {z_fold:.12g} (scan edge {band.upper:.8g}), g={g_fold:.12g}")
        return BandEdge(z=z_fold, h=h_fold, g=g_fold, refined=True)

    logger.warning(
        f"Fold refinement did not converge near {band.upper:.8g} ({result.message}); "
        f"using the scanned edge"
    )
    return BandEdge(z=band.upper, h=h0, g=direct_g(h0, x0, model).real, refined=False)


def g_max(
    model: ModelSpec,
    band: Band,
    opts: Optional[SolverOptions] = None,
    edge: Optional[BandEdge] = None
) -> float:
    """Largest real g, extrapolated to the upper band edge.

    g is evaluated at edge + delta for delta in (1e-2, 1e-3, 1e-4) sqrt(c)
    and fitted as a polynomial in sqrt(delta); the constant term is g_max.
    """
    edge = edge or refine_upper_edge(model, band, opts)
    root_c = math.sqrt(model.c)
    evaluator = RealG(model, opts)

    offsets, values = [], []
    for factor in G_MAX_LADDER:
        delta = factor * root_c
        try:
            values.append(evaluator(edge.z + delta))
            offsets.append(delta)
        except SolverError as e:
            logger.warning(f"g_max ladder point delta={delta:.3g} failed: {e}")
    if len(offsets) < 2:
        raise SolverError("g_max: fewer than two ladder points converged")

    roots = np.sqrt(np.asarray(offsets))
    coefficients = np.polyfit(roots, np.asarray(values), deg=min(2, len(roots) - 1))
    value = float(coefficients[-1])
    logger.debug(f"g_max={value:.12g} (fold value {edge.g:.12g})")
    return value


def _classify(alpha: float, gmax: float) -> tuple[bool, bool]:
    """(candidate visible, marginal) for one alpha."""
    if alpha <= 0:
        return False, False
    gap = gmax - 1.0 / alpha
    if abs(gap) <= MARGINAL_BAND:
        return False, True
    return gap > 0, False


def _degenerate_flags(alphas: Sequence[float]) -> list[bool]:
    values = np.asarray(alphas, dtype=float)
    scale = max(1.0, float(np.max(np.abs(values)))) if len(values) else 1.0
    flags = []
    for r, alpha in enumerate(values):
        others = np.delete(values, r)
        flags.append(bool(alpha > 0 and np.any(np.abs(others - alpha) <= DEGENERACY_TOL * scale)))
    return flags


def outlier_eigenvalues(
    model: ModelSpec,
    band: Optional[Band] = None,
    opts: Optional[SolverOptions] = None,
    threads: int = 0
) -> OutlierReport:
    """Solve g(z) = 1/alpha_r above the band for every alpha_r.

    Args:
        model: Validated model
        band: Precomputed band (found here when omitted)
        opts: Solver configuration
        threads: Worker count for the band scan

    Returns:
        OutlierReport ordered by r (alphas descending)

    Raises:
        BracketFailure: If g - 1/alpha has no sign change on the bracket
    """
    opts = opts or SolverOptions()
    if band is None:
        band = find_band_edges(model, threads=threads, opts=opts)
    alphas = rank_structure(model).alphas
    edge = refine_upper_edge(model, band, opts)
    gmax = g_max(model, band, opts, edge)
    degenerate = _degenerate_flags(alphas)
    evaluator = RealG(model, opts)
    root_c = math.sqrt(model.c)

    entries = []
    for r, alpha in enumerate(alphas, start=1):
        visible, marginal = _classify(alpha, gmax)
        if marginal:
            logger.warning(f"Outlier {r}: alpha g_max = {alpha * gmax:.9f} is within the marginal band")
        if not visible:
            entries.append(OutlierEntry(
                r=r, alpha=alpha, z=None, visible=False,
                marginal=marginal, degenerate=degenerate[r - 1]
            ))
            continue

        target = 1.0 / alpha

        def defect(x: float) -> float:
            if x == edge.z:
                return edge.g - target
            return evaluator(x) - target

        lower = edge.z
        upper = max(alpha + model.c + 2.0 * root_c, edge.z + root_c)
        for _ in range(BRACKET_EXPANSIONS):
            if defect(upper) < 0:
                break
            upper = edge.z + 2.0 * (upper - edge.z)
        f_lower, f_upper = defect(lower), defect(upper)
        if not (f_lower > 0 > f_upper):
            raise BracketFailure(
                f"BracketFailure: g - 1/alpha_{r} has values {f_lower:.3e}, {f_upper:.3e} "
                f"on [{lower:.8g}, {upper:.8g}]"
            )
        z = scipy.optimize.brentq(defect, lower, upper, xtol=1e-12, rtol=1e-13, maxiter=500)
        logger.info(f"Outlier {r}: alpha={alpha:.8g}, z={z:.10g}")
        entries.append(OutlierEntry(
            r=r, alpha=alpha, z=float(z), visible=True,
            marginal=False, degenerate=degenerate[r - 1]
        ))

    return OutlierReport(entries=tuple(entries), g_max=gmax, edge=edge.z, g_edge=edge.g)


def two_community_family(
    kappa_atoms: Sequence[tuple[float, float]],
    n: int = 1000
) -> Callable[[float], ModelSpec]:
    """theta -> two-community model with fixed kappa atoms."""
    return lambda theta: build_two_community_model(kappa_atoms, theta, n)


def simplex_family(
    q: int,
    magnitude_atoms: Sequence[tuple[float, float]],
    n: int = 1000
) -> Callable[[float], ModelSpec]:
    """phi -> simplex model; larger angles separate the groups more."""
    return lambda phi: build_simplex_model(q, phi, magnitude_atoms, n)


def band_g_max(model: ModelSpec, opts: Optional[SolverOptions] = None, threads: int = 1) -> float:
    """Band search followed by g_max."""
    band = find_band_edges(model, threads=threads, opts=opts)
    return g_max(model, band, opts)


def threshold_from_g_max(c: float, gmax: float) -> float:
    """theta at which alpha_2 = theta^2 / c reaches 1 / g_max."""
    return math.sqrt(c / gmax)


def detectability_threshold(
    kappa_atoms: Sequence[tuple[float, float]],
    n: int = 1000,
    opts: Optional[SolverOptions] = None,
    threads: int = 0
) -> float:
    """theta* = sqrt(c / g_max) for the two-community family.

    The band does not depend on theta, so it is computed once at theta = 0.
    """
    model = build_two_community_model(kappa_atoms, 0.0, n)
    gmax = band_g_max(model, opts, threads)
    theta = threshold_from_g_max(model.c, gmax)
    logger.info(f"Detectability threshold theta*={theta:.8g} (c={model.c:.6g}, g_max={gmax:.10g})")
    return theta


def threshold_sweep(
    kappa_atoms: Sequence[tuple[float, float]],
    thetas: Sequence[float],
    n: int = 1000,
    opts: Optional[SolverOptions] = None,
    threads: int = 0
) -> tuple[float, list[dict]]:
    """alpha_2 and visibility of the second outlier along a theta sweep.

    Returns:
        (g_max, rows of {theta, alpha2, visible, marginal})
    """
    gmax = band_g_max(build_two_community_model(kappa_atoms, 0.0, n), opts, threads)
    rows = []
    for theta in thetas:
        alphas = rank_structure(build_two_community_model(kappa_atoms, float(theta), n)).alphas
        alpha2 = alphas[1] if len(alphas) > 1 else 0.0
        visible, marginal = _classify(alpha2, gmax)
        rows.append({'theta': float(theta), 'alpha2': alpha2, 'visible': visible, 'marginal': marginal})
    return gmax, rows


def transition_sequence(
    family: Callable[[float], ModelSpec],
    sweep: Sequence[float],
    threads: int = 0,
    opts: Optional[SolverOptions] = None
) -> list[Transition]:
    """Strength values at which outliers r = 2..q merge into the band.

    alpha and g_max are evaluated at every sweep point; each sign change of
    alpha_r g_max - 1 between neighbours is refined with brentq on the exact
    alpha_r and g_max interpolated linearly between the two sweep points.

    Returns:
        Transitions ordered by disappearance as the strength decreases
        (smallest alpha first, i.e. largest strength first)
    """
    sweep = np.sort(np.asarray(sweep, dtype=float))
    if len(sweep) < 2:
        raise ValueError("transition_sequence needs at least two sweep points")

    def evaluate(strength: float):
        model = family(strength)
        return np.asarray(rank_structure(model).alphas), band_g_max(model, opts, threads=1)

    logger.info(f"Transition sweep over {len(sweep)} points")
    results = parallel_map(evaluate, sweep, threads)
    alphas = np.array([a for a, _ in results])
    gmaxes = np.array([g for _, g in results])
    q = alphas.shape[1]

    transitions = []
    for r in range(2, q + 1):
        margins = alphas[:, r - 1] * gmaxes - 1.0
        for idx in range(len(sweep) - 1):
            left, right = margins[idx], margins[idx + 1]
            if left == 0.0 or np.sign(left) == np.sign(right):
                continue
            lo, hi = sweep[idx], sweep[idx + 1]
            g_lo, g_hi = gmaxes[idx], gmaxes[idx + 1]

            def margin(s: float, r=r, lo=lo, hi=hi, g_lo=g_lo, g_hi=g_hi) -> float:
                weight = (s - lo) / (hi - lo)
                gmax = (1.0 - weight) * g_lo + weight * g_hi
                return rank_structure(family(s)).alphas[r - 1] * gmax - 1.0

            strength = scipy.optimize.brentq(margin, lo, hi, xtol=1e-10 * max(1.0, abs(hi)))
            transitions.append(Transition(r=r, strength=float(strength)))
            logger.info(f"Outlier {r} crosses the band edge at strength {strength:.8g}")
            break

    transitions.sort(key=lambda t: (-t.strength, -t.r))
    return transitions
