"""Closed-form oracles: semicircle, quadratic and cubic h, two-value band constants.

The two-value family has half the vertices with expected degree kappa1 and
half with kappa2; with the symmetric community offset the second component
of h vanishes and h1 solves

    k1 k2 h^3 - (k1 + k2) z h^2 + [2 k1 k2 / (k1 + k2) + z^2] h - z = 0.

For kappa2 = 2 kappa1 the band edge and the threshold reduce to the constants
x and y below.
"""

import logging
import math
from functools import lru_cache

import numpy as np

from community_spectra.models import CubicSolution, ThresholdConstants

logger = logging.getLogger(__name__)

HOMOTOPY_START = 1e6
HOMOTOPY_STEPS = 64
REAL_AXIS_OFFSET = 1e-10
# np.roots splits a double root into a pair about sqrt(eps) apart
REALNESS_TOL = 1e-6


def semicircle_density(x, c: float):
    """Band density of the constant-degree model, sqrt(4c - x^2) / (2 pi c)."""
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    x = np.asarray(x, dtype=float)
    rho = np.sqrt(np.clip(4.0 * c - x ** 2, 0.0, None)) / (2.0 * np.pi * c)
    return float(rho) if rho.ndim == 0 else rho


def quadratic_h(z: complex, c: float) -> complex:
    """Decaying root of c h^2 - z h + 1 = 0.

    Writing the square root as sqrt(z - 2 sqrt c) sqrt(z + 2 sqrt c) puts the
    branch cut on the band [-2 sqrt c, 2 sqrt c], so the result behaves as 1/z
    everywhere off the cut and has Im h <= 0 just above it.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    z = complex(z)
    edge = 2.0 * math.sqrt(c)
    root = np.sqrt(complex(z - edge)) * np.sqrt(complex(z + edge))
    # (z - root) / 2c, rationalized; z + root never vanishes
    return complex(2.0 / (z + root))


def cubic_coefficients(z: complex, kappa1: float, kappa2: float) -> np.ndarray:
    """Coefficients of the two-value cubic in h, highest power first."""
    product = kappa1 * kappa2
    total = kappa1 + kappa2
    return np.array([
        product,
        -total * z,
        2.0 * product / total + z * z,
        -z
    ], dtype=complex)


def _roots(z: complex, kappa1: float, kappa2: float) -> np.ndarray:
    # companion-matrix eigenvalues
    return np.roots(cubic_coefficients(z, kappa1, kappa2))


def cubic_h_roots(
    z: complex,
    kappa1: float,
    kappa2: float,
    steps: int = HOMOTOPY_STEPS
) -> CubicSolution:
    """All roots of the two-value cubic and the index of the physical one.

    The physical root is followed from z' = Re z + 1e6 i, where it is close
    to 1/z', straight down to z with geometrically shrinking imaginary part,
    picking the nearest root at every step.  The path stays in the upper
    half-plane where the physical branch is analytic.  For real z the final
    step lands on the axis from just above it, which selects Im h < 0 inside
    the band.  Points below the axis use h(conj z) = conj h(z).

    Args:
        z: Evaluation point
        kappa1: First expected degree
        kappa2: Second expected degree
        steps: Homotopy steps

    Returns:
        CubicSolution with all three roots
    """
    if kappa1 <= 0 or kappa2 <= 0:
        raise ValueError(f"kappas must be positive, got {kappa1}, {kappa2}")
    z = complex(z)
    if z.imag < 0:
        mirrored = cubic_h_roots(z.conjugate(), kappa1, kappa2, steps)
        return CubicSolution(z=z, roots=np.conj(mirrored.roots), physical_index=mirrored.physical_index)

    scale = max(HOMOTOPY_START, 10.0 * abs(z))
    floor = max(z.imag, REAL_AXIS_OFFSET * max(1.0, abs(z.real)))
    heights = np.geomspace(scale, floor, steps)

    tracked = 1.0 / complex(z.real, scale)
    for height in heights:
        candidates = _roots(complex(z.real, height), kappa1, kappa2)
        tracked = candidates[np.argmin(np.abs(candidates - tracked))]

    roots = _roots(z, kappa1, kappa2)
    index = int(np.argmin(np.abs(roots - tracked)))
    return CubicSolution(z=z, roots=roots, physical_index=index)


def cubic_backward_error(solution: CubicSolution, kappa1: float, kappa2: float) -> float:
    """Largest |p(root)| relative to the largest coefficient."""
    coefficients = cubic_coefficients(solution.z, kappa1, kappa2)
    values = np.polyval(coefficients, solution.roots)
    return float(np.max(np.abs(values)) / np.max(np.abs(coefficients)))


def two_value_g(z: complex, kappa1: float, kappa2: float) -> complex:
    """Stieltjes transform of the equal-weight two-value model."""
    h = cubic_h_roots(z, kappa1, kappa2).physical
    z = complex(z)
    return 0.5 * (1.0 / (z - kappa1 * h) + 1.0 / (z - kappa2 * h))


def two_value_density(x, kappa1: float, kappa2: float):
    """Band density on the real axis from the physical cubic root."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    rho = np.array([
        max(0.0, -two_value_g(complex(value), kappa1, kappa2).imag / math.pi)
        for value in xs
    ])
    return float(rho[0]) if np.ndim(x) == 0 else rho


def _polish(coefficients: np.ndarray, root: float) -> float:
    """Newton polish on p, or on p' when root is a double root of p."""
    p = np.poly1d(coefficients)
    dp = p.deriv()
    # a double root of p is a simple root of p'
    if abs(dp(root)) <= REALNESS_TOL * np.max(np.abs(coefficients)):
        target, slope = dp, dp.deriv()
    else:
        target, slope = p, dp
    for _ in range(8):
        derivative = slope(root)
        if derivative == 0:
            break
        step = target(root) / derivative
        root -= step
        if abs(step) <= 1e-15 * max(1.0, abs(root)):
            break
    return float(root)


def _verify_root(coefficients: np.ndarray, root: float):
    """Sign change of p across a simple root, of p' across a double root."""
    p = np.poly1d(coefficients)
    dp = p.deriv()
    delta = 1e-6 * max(1.0, abs(root))
    if np.sign(p(root - delta)) != np.sign(p(root + delta)):
        return
    tolerance = 1e-9 * np.max(np.abs(coefficients)) * max(1.0, abs(root)) ** (len(coefficients) - 1)
    if np.sign(dp(root - delta)) != np.sign(dp(root + delta)) and abs(p(root)) <= tolerance:
        return
    raise ArithmeticError(f"{root!r} is not a verified real root of {list(coefficients)}")


def _real_roots(coefficients) -> np.ndarray:
    coefficients = np.asarray(coefficients, dtype=float)
    roots = np.roots(coefficients)
    near_real = roots[np.abs(roots.imag) <= REALNESS_TOL * np.maximum(1.0, np.abs(roots))]
    polished = sorted(_polish(coefficients, value) for value in near_real.real)

    # the two halves of a split double root polish to the same value
    distinct: list[float] = []
    for value in polished:
        if not distinct or abs(value - distinct[-1]) > REALNESS_TOL * max(1.0, abs(value)):
            distinct.append(value)
    for value in distinct:
        _verify_root(coefficients, value)
    return np.array(distinct)


@lru_cache(maxsize=1)
def threshold_constants() -> ThresholdConstants:
    """x: sole real root of 27x^3 - 216x^2 + 252x - 512.

    y: smallest real root of 2y^3 - 3 sqrt(x) y^2 + (x + 4/3) y - sqrt(x).
    """
    x_roots = _real_roots([27.0, -216.0, 252.0, -512.0])
    if len(x_roots) != 1:
        raise ArithmeticError(f"expected one real root for x, found {x_roots}")
    x = float(x_roots[0])

    root_x = math.sqrt(x)
    y_roots = _real_roots([2.0, -3.0 * root_x, x + 4.0 / 3.0, -root_x])
    if len(y_roots) == 0:
        raise ArithmeticError("no real root for y")
    y = float(y_roots[0])

    logger.debug(f"Threshold constants: x={x:.12f}, y={y:.12f}")
    return ThresholdConstants(x=x, y=y)


def band_edge_two_value(kappa: float) -> float:
    """Upper band edge sqrt(x kappa) of the kappa/2kappa model."""
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return math.sqrt(threshold_constants().x * kappa)


def g_max_two_value(kappa: float) -> float:
    """(2 + 3y^2) / (2 sqrt(x kappa)) for the kappa/2kappa model."""
    constants = threshold_constants()
    return (2.0 + 3.0 * constants.y ** 2) / (2.0 * band_edge_two_value(kappa))


def threshold_two_value(kappa: float) -> float:
    """theta* = sqrt(3 sqrt(x kappa^3) / (2 + 3y^2)) for the kappa/2kappa model."""
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    constants = threshold_constants()
    return math.sqrt(3.0 * math.sqrt(constants.x * kappa ** 3) / (2.0 + 3.0 * constants.y ** 2))
