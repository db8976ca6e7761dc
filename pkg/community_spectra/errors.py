"""Exception hierarchy for model validation, file handling and the numerical solvers."""

from typing import Optional, Sequence


class SpectraError(Exception):
    """Base class for all errors raised by community_spectra."""
    pass


class ModelError(SpectraError):
    """Raised when a parameter-vector distribution is not a valid model."""
    pass


class NegativeProduct(ModelError):
    """Two atoms have a negative dot product (negative expected edge count)."""

    def __init__(self, a: int, b: int, value: float):
        self.a = a
        self.b = b
        self.value = value
        super().__init__(
            f"NegativeProduct: atoms {a} and {b} have k_a.k_b = {value:.6g} < 0"
        )


class WeightSum(ModelError):
    """Atom weights do not sum to one."""

    def __init__(self, total: float):
        self.total = total
        super().__init__(f"WeightSum: atom weights sum to {total:.15g}, expected 1")


class ZeroDegree(ModelError):
    """The model has zero average degree."""

    def __init__(self):
        super().__init__("ZeroDegree: average degree c is 0")


class ThetaTooLarge(ModelError):
    """A kappa value is smaller than the community offset theta."""

    def __init__(self, kappa: float, theta: float):
        self.kappa = kappa
        self.theta = theta
        super().__init__(f"ThetaTooLarge: kappa={kappa:g} < theta={theta:g}")


class BadAngle(ModelError):
    """Simplex angle outside [0, pi/2]."""

    def __init__(self, phi: float):
        self.phi = phi
        super().__init__(f"BadAngle: phi={phi:g} gives negative cos(phi) or lies outside [0, pi/2]")


class ConfigError(SpectraError):
    """Malformed model configuration or graph file."""
    pass


class SolverError(SpectraError):
    """Base class for numerical failures."""
    pass


class NoConvergence(SolverError):
    """Fixed-point iteration did not reach the tolerance."""

    def __init__(self, max_iter: int, residual: float, z: Optional[complex] = None):
        self.max_iter = max_iter
        self.residual = residual
        self.z = z
        where = f" at z={z}" if z is not None else ""
        super().__init__(
            f"NoConvergence: residual {residual:.3e} after {max_iter} iterations{where}"
        )


class NonPhysicalBranch(SolverError):
    """Converged fixed point lies on a branch with negative spectral density."""

    def __init__(self, z: complex, im_g: float):
        self.z = z
        self.im_g = im_g
        super().__init__(f"NonPhysicalBranch: Im g = {im_g:.3e} at z={z}")


class EmptyBand(SolverError):
    """No spectral density found in the search range."""
    pass


class BracketFailure(SolverError):
    """Root bracket for an outlier is invalid (g not monotone on the bracket)."""
    pass


class DensityFailure(SolverError):
    """Too many grid points of a density sweep failed to converge."""

    def __init__(self, failed_points: Sequence[float], total: int):
        self.failed_points = list(failed_points)
        self.total = total
        super().__init__(
            f"DensityFailure: {len(self.failed_points)} of {total} grid points did not converge"
        )


class IterativeNoConvergence(SolverError):
    """Sparse eigensolver failed or returned pairs with large residuals."""

    def __init__(self, residuals: Sequence[float], message: str = ""):
        self.residuals = list(residuals)
        detail = f": {message}" if message else ""
        super().__init__(f"IterativeNoConvergence{detail} (residuals={self.residuals})")
