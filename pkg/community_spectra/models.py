"""Data models for the generative model, theory results and empirical spectra."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.integrate
import scipy.sparse


@dataclass(frozen=True)
class ParamAtom:
    """One atom of the parameter-vector distribution p(k)."""
    k: tuple[float, ...]
    weight: float
    group: Optional[int] = None

    @property
    def magnitude(self) -> float:
        """Euclidean length of k."""
        return float(np.linalg.norm(self.k))


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Validated model: n vertices, q-dimensional atoms, derived 2m and c."""
    n: int
    q: int
    atoms: tuple[ParamAtom, ...]
    two_m: float
    c: float

    @property
    def vectors(self) -> np.ndarray:
        """Atom vectors as an (atoms, q) array."""
        return np.array([a.k for a in self.atoms], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        """Atom weights as an array."""
        return np.array([a.weight for a in self.atoms], dtype=float)

    @property
    def mean_vector(self) -> np.ndarray:
        """Weighted mean parameter vector sum_a w_a k_a."""
        return self.weights @ self.vectors

    @property
    def groups(self) -> np.ndarray:
        """Planted community index of each atom."""
        return np.array(
            [a.group if a.group is not None else idx for idx, a in enumerate(self.atoms)],
            dtype=int
        )

    @property
    def num_groups(self) -> int:
        """Number of distinct planted communities."""
        return len(np.unique(self.groups))

    @property
    def max_magnitude(self) -> float:
        """Largest atom vector length."""
        return float(np.max(np.linalg.norm(self.vectors, axis=1)))

    def summary(self) -> dict:
        """Plain-dict description used by `model describe`."""
        return {
            'n': self.n,
            'q': self.q,
            'atoms': len(self.atoms),
            'c': self.c,
            'two_m': self.two_m,
        }


@dataclass(frozen=True, eq=False)
class RankQStructure:
    """Eigenvalues alpha_r of <A> and the q x q Gram matrix they come from."""
    alphas: tuple[float, ...]
    gram: np.ndarray


@dataclass(frozen=True, eq=False)
class SampledGraph:
    """Sparse undirected multigraph with planted atom labels.

    `edges` is an (E, 3) integer array of (i, j, multiplicity) rows with i < j,
    sorted lexicographically.
    """
    n: int
    edges: np.ndarray
    labels: np.ndarray
    seed: int
    atom_groups: Optional[np.ndarray] = None

    @property
    def num_edges(self) -> int:
        """Total edge count, multiplicities included."""
        return int(self.edges[:, 2].sum()) if len(self.edges) else 0

    @property
    def communities(self) -> np.ndarray:
        """Planted community of each vertex."""
        if self.atom_groups is None:
            return self.labels.copy()
        return self.atom_groups[self.labels]

    def adjacency(self) -> scipy.sparse.csr_matrix:
        """Symmetric sparse adjacency matrix with multiplicities."""
        if len(self.edges) == 0:
            return scipy.sparse.csr_matrix((self.n, self.n), dtype=float)
        i, j, m = self.edges[:, 0], self.edges[:, 1], self.edges[:, 2].astype(float)
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        data = np.concatenate([m, m])
        return scipy.sparse.coo_matrix(
            (data, (rows, cols)), shape=(self.n, self.n)
        ).tocsr()

    def degrees(self) -> np.ndarray:
        """Vertex degrees counting multiplicity."""
        deg = np.zeros(self.n, dtype=np.int64)
        if len(self.edges):
            np.add.at(deg, self.edges[:, 0], self.edges[:, 2])
            np.add.at(deg, self.edges[:, 1], self.edges[:, 2])
        return deg


@dataclass(frozen=True)
class DegreeStats:
    """Degree statistics of the vertices sharing one atom label."""
    label: int
    mean: float
    variance: float
    count: int


@dataclass(frozen=True)
class SolverOptions:
    """Fixed-point solver configuration."""
    tol: float = 1e-12
    max_iter: int = 100_000
    damping: float = 0.5
    oscillation_window: int = 5
    newton: bool = True


@dataclass(frozen=True, eq=False)
class HSolution:
    """Converged solution h(z) of the self-consistent equation."""
    z: complex
    h: np.ndarray
    residual: float
    iterations: int


@dataclass(frozen=True, eq=False)
class DensityCurve:
    """Spectral density sampled on a real grid at broadening epsilon."""
    xs: np.ndarray
    rho: np.ndarray
    epsilon: float
    failures: tuple[float, ...] = ()

    def integral(self) -> float:
        """Trapezoid integral of rho over the grid."""
        return float(scipy.integrate.trapezoid(self.rho, self.xs))

    def interpolate(self, x) -> np.ndarray:
        """Linear interpolation of the density, zero outside the grid."""
        return np.interp(x, self.xs, self.rho, left=0.0, right=0.0)


@dataclass(frozen=True)
class Band:
    """Disjoint intervals of the real axis carrying spectral density."""
    intervals: tuple[tuple[float, float], ...]

    @property
    def lower(self) -> float:
        return self.intervals[0][0]

    @property
    def upper(self) -> float:
        return self.intervals[-1][1]

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {'intervals': [[lo, hi] for lo, hi in self.intervals]}


@dataclass(frozen=True, eq=False)
class BandEdge:
    """Upper band edge as a fold of the real fixed-point equation."""
    z: float
    h: np.ndarray
    g: float
    refined: bool


@dataclass(frozen=True)
class OutlierEntry:
    """Outlier status for one eigenvalue alpha_r of <A>."""
    r: int
    alpha: float
    z: Optional[float]
    visible: bool
    marginal: bool = False
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            'r': self.r,
            'alpha': self.alpha,
            'z': self.z,
            'visible': self.visible,
            'marginal': self.marginal,
            'degenerate': self.degenerate,
        }


@dataclass(frozen=True)
class OutlierReport:
    """Outlying eigenvalues and the band-edge value of g."""
    entries: tuple[OutlierEntry, ...]
    g_max: float
    edge: float
    g_edge: float

    @property
    def visible(self) -> list[OutlierEntry]:
        return [e for e in self.entries if e.visible]

    @property
    def num_visible(self) -> int:
        return len(self.visible)

    def to_dict(self) -> dict:
        return {
            'g_max': self.g_max,
            'edge': self.edge,
            'g_edge': self.g_edge,
            'outliers': [e.to_dict() for e in self.entries],
        }


@dataclass(frozen=True)
class Transition:
    """Strength value at which outlier r merges into the band."""
    r: int
    strength: float


@dataclass(frozen=True, eq=False)
class CubicSolution:
    """All three roots of the two-value cubic in h and the physical one."""
    z: complex
    roots: np.ndarray
    physical_index: int

    @property
    def physical(self) -> complex:
        return complex(self.roots[self.physical_index])


@dataclass(frozen=True)
class ThresholdConstants:
    """Roots of the two cubics fixing the kappa/2kappa band edge and threshold."""
    x: float
    y: float

    @property
    def coefficient(self) -> float:
        """theta* / kappa^(3/4) for the kappa/2kappa family."""
        return float(np.sqrt(3.0 * np.sqrt(self.x) / (2.0 + 3.0 * self.y ** 2)))

    def to_dict(self) -> dict:
        return {'x': self.x, 'y': self.y, 'coefficient': self.coefficient}


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Combined theory output for one model."""
    model: ModelSpec
    alphas: tuple[float, ...]
    density: DensityCurve
    band: Band
    outliers: OutlierReport

    def to_dict(self) -> dict:
        data = self.model.summary()
        data['alphas'] = list(self.alphas)
        data['band'] = self.band.to_dict()
        data.update(self.outliers.to_dict())
        data['visible'] = self.outliers.num_visible
        data['epsilon'] = self.density.epsilon
        return data


@dataclass(frozen=True, eq=False)
class EmpiricalSpectrum:
    """Eigenvalues of one adjacency (or centered) matrix, sorted descending."""
    eigenvalues: np.ndarray
    n: int
    seed: int
    mode: str = "full"

    @property
    def complete(self) -> bool:
        return len(self.eigenvalues) == self.n


@dataclass(frozen=True, eq=False)
class Histogram:
    """Density-normalized histogram of eigenvalues."""
    edges: np.ndarray
    density: np.ndarray
    excluded: int = 0

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Spectral community recovery scored against planted communities."""
    accuracy: float
    assignments: np.ndarray
    q: int


@dataclass(frozen=True)
class ComparisonResult:
    """Theory-versus-sample comparison and its acceptance verdict."""
    l1_distance: float
    outlier_errors: tuple[float, ...]
    count_above_edge: int
    expected_visible: int
    l1_tolerance: float = 0.05
    outlier_tolerance: float = 0.03

    @property
    def failures(self) -> list[str]:
        problems = []
        if not self.l1_distance <= self.l1_tolerance:
            problems.append(
                f"L1 distance {self.l1_distance:.4f} exceeds {self.l1_tolerance}"
            )
        for idx, err in enumerate(self.outlier_errors, 1):
            if not err <= self.outlier_tolerance:
                problems.append(
                    f"outlier {idx} relative error {err:.4f} exceeds {self.outlier_tolerance}"
                )
        if self.count_above_edge != self.expected_visible:
            problems.append(
                f"{self.count_above_edge} eigenvalues above band edge, "
                f"expected {self.expected_visible}"
            )
        return problems

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            'l1_distance': self.l1_distance,
            'outlier_errors': list(self.outlier_errors),
            'counts': {
                'above_edge': self.count_above_edge,
                'expected_visible': self.expected_visible,
            },
            'passed': self.passed,
            'failures': self.failures,
        }


@dataclass
class RunConfig:
    """Resolved command-line configuration of one run."""
    command: str
    seed: int = 0
    threads: int = 0
    format: str = "json"
    out: Optional[str] = None
    log_dir: str = "./logs"
    flags: dict = field(default_factory=dict)

    def hashable(self) -> dict:
        """Fields that determine the output (threads and paths excluded)."""
        return {
            'command': self.command,
            'seed': self.seed,
            'format': self.format,
            'flags': self.flags,
        }
