"""Self-consistent resolvent equation and spectral density.

For a finite-atom model the auxiliary vector h(z) solves

    h = (1/c) sum_a w_a k_a / (z - k_a.h)

and the Stieltjes transform is g(z) = sum_a w_a / (z - k_a.h), equivalently
(1 + c h.h) / z with the unconjugated sum of squares.  The density is
rho(x) = -Im g(x + i eps) / pi.
"""

import dataclasses
import logging
import math
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from community_spectra.errors import (
    DensityFailure,
    EmptyBand,
    NoConvergence,
    NonPhysicalBranch,
    SolverError,
)
from community_spectra.models import Band, DensityCurve, HSolution, ModelSpec, SolverOptions
from community_spectra.utils import parallel_map

logger = logging.getLogger(__name__)

PHYSICAL_TOL = 1e-9
# Newton steps are tried once the defect is this small relative to |h|
NEWTON_RADIUS = 1e-4
# an iteration that keeps less than this much of the defect is making progress
STALL_RATIO = 0.5
NEWTON_FRACTIONS = (1.0, 0.5, 0.25, 0.125, 0.0625)
MIN_DAMPING = 2.0 ** -10
COARSE_POINTS = 200
MAX_FAILURE_FRACTION = 0.01
BAND_CUT = 1e-3
EPSILON_LADDER = (1e-2, 1e-3, 1e-4, 1e-5)
EDGE_RESOLUTION = 1e-4
SCAN_POINTS = 801
MAX_WIDENINGS = 3


@lru_cache(maxsize=64)
def _arrays(model: ModelSpec) -> tuple[np.ndarray, np.ndarray, float, np.ndarray]:
    vectors = model.vectors
    weights = model.weights
    return vectors, weights, model.c, weights @ vectors


def fixed_point_map(h: np.ndarray, z: complex, model: ModelSpec) -> np.ndarray:
    """Right-hand side F(h) of the self-consistent equation."""
    vectors, weights, c, _ = _arrays(model)
    return vectors.T @ (weights / (z - vectors @ h)) / c


def fixed_point_jacobian(h: np.ndarray, z: complex, model: ModelSpec) -> np.ndarray:
    """dF/dh = (1/c) sum_a w_a k_a k_a^T / (z - k_a.h)^2."""
    vectors, weights, c, _ = _arrays(model)
    scale = weights / (z - vectors @ h) ** 2
    return (vectors.T * scale) @ vectors / c


def asymptotic_start(z: complex, model: ModelSpec) -> np.ndarray:
    """Large-|z| behaviour h ~ sum_a w_a k_a / (c z)."""
    _, _, c, mean = _arrays(model)
    return mean / (c * z)


def direct_g(h: np.ndarray, z: complex, model: ModelSpec) -> complex:
    """g as the atom sum sum_a w_a / (z - k_a.h); regular at z = 0."""
    vectors, weights, _, _ = _arrays(model)
    return complex(np.sum(weights / (z - vectors @ h)))


def stieltjes_g(solution: HSolution, model: ModelSpec) -> complex:
    """g = (1 + c h.h) / z, falling back to the atom sum near z = 0."""
    z = complex(solution.z)
    if abs(z) < 1e-12 * max(1.0, math.sqrt(model.c)):
        return direct_g(solution.h, z, model)
    h = solution.h
    return complex((1.0 + model.c * np.sum(h * h)) / z)


def _newton_step(
    h: np.ndarray,
    defect: np.ndarray,
    residual: float,
    z,
    model: ModelSpec,
    is_physical: Callable[[np.ndarray], bool]
) -> Optional[np.ndarray]:
    """Backtracking Newton step on F(h) - h, or None if no fraction helps."""
    try:
        step = np.linalg.solve(np.eye(len(h)) - fixed_point_jacobian(h, z, model), defect)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(step)):
        return None
    for fraction in NEWTON_FRACTIONS:
        candidate = h + fraction * step
        with np.errstate(divide='ignore', invalid='ignore'):
            candidate_residual = float(np.max(np.abs(fixed_point_map(candidate, z, model) - candidate)))
        # nan compares false, so a candidate on a pole is never taken
        if candidate_residual < residual and is_physical(candidate):
            return candidate
    return None


def _iterate(
    h: np.ndarray,
    z,
    model: ModelSpec,
    opts: SolverOptions,
    is_physical: Callable[[np.ndarray], bool]
) -> tuple[np.ndarray, float, int]:
    """Damped fixed-point iteration with safeguarded Newton steps.

    Near the band the map contracts at a rate close to 1, so the damped
    iteration stalls.  Newton takes over once the defect is small relative
    to |h| or after oscillation_window iterations that each shrink the
    defect by less than STALL_RATIO, and stays in charge while its steps
    keep lowering the defect and pass the branch test.

    Returns (h, residual, iterations) at the first iterate whose defect is
    within tolerance.
    """
    damping = opts.damping
    increases = 0
    slow = 0
    newton_mode = False
    previous = np.inf
    residual = np.inf

    for iteration in range(1, opts.max_iter + 1):
        mapped = fixed_point_map(h, z, model)
        defect = mapped - h
        residual = float(np.max(np.abs(defect)))
        if not np.isfinite(residual):
            break
        if residual <= opts.tol:
            return h, residual, iteration

        slow = slow + 1 if residual > STALL_RATIO * previous else 0
        near = residual <= NEWTON_RADIUS * max(float(np.max(np.abs(h))), 1e-300)
        if opts.newton and (newton_mode or near or slow >= opts.oscillation_window):
            candidate = _newton_step(h, defect, residual, z, model, is_physical)
            if candidate is not None:
                h = candidate
                previous = residual
                increases = 0
                newton_mode = True
                continue
            newton_mode = False
            slow = 0

        if residual > previous:
            increases += 1
            if increases >= opts.oscillation_window:
                damping = max(damping / 2.0, MIN_DAMPING)
                increases = 0
                logger.debug(f"Oscillation at z={z}: damping reduced to {damping:g}")
        else:
            increases = 0
        previous = residual
        h = (1.0 - damping) * h + damping * mapped

    raise NoConvergence(opts.max_iter, residual, z)


def solve_h(
    z: complex,
    model: ModelSpec,
    warm_start: Optional[np.ndarray] = None,
    opts: Optional[SolverOptions] = None
) -> HSolution:
    """Solve the self-consistent equation at a point of the upper half-plane.

    Args:
        z: Evaluation point with Im z > 0
        model: Validated model
        warm_start: Initial h (defaults to the 1/z asymptotic start)
        opts: Solver configuration

    Returns:
        HSolution with fixed-point defect <= opts.tol

    Raises:
        NoConvergence: If the defect does not reach tol within max_iter
        NonPhysicalBranch: If the converged solution has Im g > 1e-9
    """
    opts = opts or SolverOptions()
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"solve_h needs Im z > 0, got z={z}")

    if warm_start is None:
        h = asymptotic_start(z, model).astype(complex)
    else:
        h = np.array(warm_start, dtype=complex)

    h, residual, iterations = _iterate(
        h, z, model, opts,
        lambda candidate: direct_g(candidate, z, model).imag <= PHYSICAL_TOL
    )
    im_g = direct_g(h, z, model).imag
    if im_g > PHYSICAL_TOL:
        raise NonPhysicalBranch(z, im_g)
    return HSolution(z=z, h=h, residual=residual, iterations=iterations)


def largest_jacobian_eigenvalue(h: np.ndarray, x: float, model: ModelSpec) -> float:
    """Largest eigenvalue of the (real symmetric) Jacobian at a real point."""
    return float(np.linalg.eigvalsh(fixed_point_jacobian(h, x, model))[-1])


def solve_h_real(
    x: float,
    model: ModelSpec,
    warm_start: Optional[np.ndarray] = None,
    opts: Optional[SolverOptions] = None
) -> HSolution:
    """Solve the self-consistent equation on the real axis outside the band.

    The physical branch is the one continued from infinity, which is the
    attracting fixed point: the largest Jacobian eigenvalue stays below 1.

    Raises:
        NoConvergence: Typically when x lies inside the band
        NonPhysicalBranch: If the fixed point found is not attracting
    """
    opts = opts or SolverOptions()
    x = float(x)
    if x == 0.0:
        raise ValueError("solve_h_real needs x != 0")

    if warm_start is None:
        h = asymptotic_start(x, model).astype(float)
    else:
        h = np.array(warm_start, dtype=float)

    h, residual, iterations = _iterate(
        h, x, model, opts,
        lambda candidate: largest_jacobian_eigenvalue(candidate, x, model) < 1.0
    )
    leading = largest_jacobian_eigenvalue(h, x, model)
    if leading >= 1.0:
        raise NonPhysicalBranch(x, leading)
    return HSolution(z=complex(x), h=h, residual=residual, iterations=iterations)


def density_at(
    x: float,
    model: ModelSpec,
    epsilon: float,
    warm_start: Optional[np.ndarray] = None,
    opts: Optional[SolverOptions] = None
) -> float:
    """rho(x) = -Im g(x + i eps) / pi, clamped at zero."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    solution = solve_h(complex(x, epsilon), model, warm_start, opts)
    return _density(solution, model)


def _density(solution: HSolution, model: ModelSpec) -> float:
    return max(0.0, -direct_g(solution.h, solution.z, model).imag / math.pi)


def density_via_h(solution: HSolution, model: ModelSpec) -> float:
    """-(c / pi x) Im(h.h), valid away from x = 0."""
    x = solution.z.real
    h = solution.h
    return float(-(model.c / (math.pi * x)) * np.sum(h * h).imag)


def _retry_options(opts: SolverOptions) -> SolverOptions:
    return dataclasses.replace(opts, damping=opts.damping / 2.0)


def _coarse_pass(
    xs: np.ndarray,
    model: ModelSpec,
    epsilon: float,
    opts: SolverOptions
) -> list[Optional[np.ndarray]]:
    """Continuation sweep from both ends of the grid toward the middle."""
    solutions: list[Optional[np.ndarray]] = [None] * len(xs)
    middle = len(xs) // 2
    for order in (range(len(xs) - 1, middle - 1, -1), range(0, middle)):
        warm = None
        for idx in order:
            try:
                warm = solve_h(complex(xs[idx], epsilon), model, warm, opts).h
                solutions[idx] = warm
            except SolverError as e:
                logger.debug(f"Coarse point x={xs[idx]:.6g} failed: {e}")
                warm = None
    return solutions


def _nearest_warm(x: float, xs: np.ndarray, solutions: Sequence[Optional[np.ndarray]]):
    order = np.argsort(np.abs(xs - x), kind='stable')
    for idx in order[:4]:
        if solutions[idx] is not None:
            return solutions[idx]
    return None


def density_curve(
    model: ModelSpec,
    lo: float,
    hi: float,
    points: int,
    epsilon: float,
    threads: int = 0,
    opts: Optional[SolverOptions] = None
) -> DensityCurve:
    """Spectral density on an evenly spaced grid.

    A serial coarse sweep walks in from both ends with warm starts, then every
    grid point is solved concurrently from the nearest coarse solution.
    Points that still fail are recorded and filled by linear interpolation.

    Args:
        model: Validated model
        lo: Grid start
        hi: Grid end
        points: Number of grid points
        epsilon: Broadening (Im z)
        threads: Worker count (0 = all CPUs)
        opts: Solver configuration

    Returns:
        DensityCurve

    Raises:
        DensityFailure: If more than 1% of grid points fail
    """
    if not hi > lo:
        raise ValueError(f"density grid needs lo < hi, got [{lo}, {hi}]")
    if points < 2:
        raise ValueError(f"density grid needs at least 2 points, got {points}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    opts = opts or SolverOptions()

    xs = np.linspace(lo, hi, points)
    stride = max(1, points // COARSE_POINTS)
    coarse_idx = np.unique(np.r_[np.arange(0, points, stride), points - 1])
    coarse_x = xs[coarse_idx]
    coarse_h = _coarse_pass(coarse_x, model, epsilon, opts)

    retry_opts = _retry_options(opts)

    def evaluate(x: float) -> Optional[float]:
        z = complex(x, epsilon)
        try:
            return _density(solve_h(z, model, _nearest_warm(x, coarse_x, coarse_h), opts), model)
        except SolverError:
            pass
        try:
            return _density(solve_h(z, model, None, retry_opts), model)
        except SolverError as e:
            logger.warning(f"Density point x={x:.6g} failed: {e}")
            return None

    values = parallel_map(evaluate, xs, threads)
    failed = np.array([v is None for v in values])
    if failed.sum() > MAX_FAILURE_FRACTION * points:
        raise DensityFailure(xs[failed].tolist(), points)

    rho = np.array([np.nan if v is None else v for v in values], dtype=float)
    if failed.any():
        rho[failed] = np.interp(xs[failed], xs[~failed], rho[~failed])
    logger.info(
        f"Density curve on [{lo:.6g}, {hi:.6g}], {points} points, eps={epsilon:g}: "
        f"{int(failed.sum())} failures"
    )
    return DensityCurve(xs=xs, rho=rho, epsilon=epsilon, failures=tuple(xs[failed].tolist()))


def default_search(model: ModelSpec) -> tuple[float, float]:
    """Search range +-(2 max|k| + 4 sqrt c)."""
    half = 2.0 * model.max_magnitude + 4.0 * math.sqrt(model.c)
    return -half, half


class _Indicator:
    """rho(x; eps) > cut with per-epsilon warm-start caches.

    A point whose warm-started solve fails is retried once from the
    asymptotic start with half the damping; a second failure propagates.
    """

    def __init__(self, model: ModelSpec, cut: float, opts: SolverOptions):
        self.model = model
        self.cut = cut
        self.opts = opts
        self.retry_opts = _retry_options(opts)
        self.cache: dict[float, dict[float, np.ndarray]] = {}

    def __call__(self, x: float, epsilon: float) -> bool:
        known = self.cache.setdefault(epsilon, {})
        warm = None
        if known:
            nearest = min(known, key=lambda key: abs(key - x))
            warm = known[nearest]
        z = complex(x, epsilon)
        try:
            solution = solve_h(z, self.model, warm, self.opts)
        except SolverError as e:
            logger.debug(f"Indicator at x={x:.8g}, eps={epsilon:g} retried cold: {e}")
            solution = solve_h(z, self.model, None, self.retry_opts)
        known[x] = solution.h
        return _density(solution, self.model) > self.cut


def _bisect_at(
    indicator: _Indicator,
    inside: float,
    outside: float,
    spacing: float,
    epsilon: float,
    resolution: float
) -> tuple[float, float]:
    step = spacing
    for _ in range(30):
        if not indicator(outside, epsilon):
            break
        outside += step
        step *= 2.0
    for _ in range(30):
        if indicator(inside, epsilon):
            break
        inside -= spacing
    while abs(outside - inside) > resolution:
        middle = 0.5 * (inside + outside)
        if indicator(middle, epsilon):
            inside = middle
        else:
            outside = middle
    return inside, outside


def _refine_edge(
    indicator: _Indicator,
    inside: float,
    outside: float,
    epsilons: Sequence[float],
    resolution: float
) -> float:
    """Bisect the density indicator between an inside and an outside point.

    Each epsilon of the ladder starts from the coarse inside point and the
    previous outside point, widening either end until the bracket is valid.
    If the solver gives up at some epsilon, the estimate from the previous
    rung is kept and the smaller broadenings are skipped.
    """
    anchor = inside
    spacing = outside - inside
    estimate = 0.5 * (inside + outside)
    for epsilon in epsilons:
        try:
            lower, upper = _bisect_at(indicator, anchor, outside, spacing, epsilon, resolution)
        except SolverError as e:
            logger.warning(f"Edge near {estimate:.8g}: refinement stopped at eps={epsilon:g} ({e})")
            break
        outside = upper
        estimate = 0.5 * (lower + upper)
        logger.debug(f"Edge near {estimate:.8g} at eps={epsilon:g}")
    return estimate


def find_band_edges(
    model: ModelSpec,
    search: Optional[tuple[float, float]] = None,
    epsilon_sequence: Optional[Sequence[float]] = None,
    threads: int = 0,
    opts: Optional[SolverOptions] = None
) -> Band:
    """Locate the intervals of the real axis carrying spectral density.

    A coarse scan at the smallest epsilon marks grid points with
    rho > 1e-3 max(rho); every boundary is then bisected down the epsilon
    ladder to a resolution of 1e-4 sqrt(c).

    Args:
        model: Validated model
        search: (lo, hi) range, default +-(2 max|k| + 4 sqrt c)
        epsilon_sequence: Broadenings, default (1e-2 ... 1e-5) sqrt(c)
        threads: Worker count for the scan
        opts: Solver configuration

    Returns:
        Band with sorted disjoint intervals

    Raises:
        EmptyBand: If no density is found in the search range
    """
    opts = opts or SolverOptions()
    root_c = math.sqrt(model.c)
    lo, hi = search if search is not None else default_search(model)
    if not hi > lo:
        raise ValueError(f"band search needs lo < hi, got [{lo}, {hi}]")
    if epsilon_sequence is None:
        epsilons = [factor * root_c for factor in EPSILON_LADDER]
    else:
        epsilons = sorted((float(e) for e in epsilon_sequence), reverse=True)
    if not epsilons or min(epsilons) <= 0:
        raise ValueError("epsilon_sequence must hold positive values")

    for attempt in range(MAX_WIDENINGS + 1):
        curve = density_curve(model, lo, hi, SCAN_POINTS, epsilons[-1], threads, opts)
        peak = float(curve.rho.max())
        if not peak > 0:
            raise EmptyBand(f"EmptyBand: no spectral density in [{lo:.6g}, {hi:.6g}]")
        cut = BAND_CUT * peak
        inside = curve.rho > cut
        if not (inside[0] or inside[-1]):
            break
        if attempt == MAX_WIDENINGS:
            logger.warning(f"Band still touches the search range [{lo:.6g}, {hi:.6g}]")
            break
        center, half = 0.5 * (lo + hi), hi - lo
        lo, hi = center - half, center + half
        logger.warning(f"Band touches the search range, widening to [{lo:.6g}, {hi:.6g}]")

    xs = curve.xs
    indicator = _Indicator(model, cut, opts)
    resolution = EDGE_RESOLUTION * root_c

    # contiguous runs of inside points
    padded = np.r_[False, inside, False].astype(int)
    changes = np.diff(padded)
    starts = np.flatnonzero(changes == 1)
    ends = np.flatnonzero(changes == -1) - 1

    intervals = []
    for start, end in zip(starts, ends):
        if start == 0:
            lower = float(xs[0])
        else:
            lower = _refine_edge(indicator, xs[start], xs[start - 1], epsilons, resolution)
        if end == len(xs) - 1:
            upper = float(xs[-1])
        else:
            upper = _refine_edge(indicator, xs[end], xs[end + 1], epsilons, resolution)
        if upper > lower:
            intervals.append((lower, upper))

    if not intervals:
        raise EmptyBand("EmptyBand: density indicator found no interval")

    # refined neighbours can overlap across a narrow gap
    merged = [intervals[0]]
    for lower, upper in intervals[1:]:
        if lower <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(upper, merged[-1][1]))
        else:
            merged.append((lower, upper))

    band = Band(intervals=tuple(merged))
    logger.info(f"Band intervals: {band.intervals}")
    return band
