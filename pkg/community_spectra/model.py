"""Generative model: finite-atom distributions of parameter vectors k.

The number of edges between vertices i and j is Poisson with mean
k_i.k_j / 2m, where 2m = n |sum_a w_a k_a|.  Everything downstream (sampling,
the resolvent fixed point, outliers) reads its constants from the ModelSpec
built here.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from community_spectra.errors import (
    BadAngle,
    ModelError,
    NegativeProduct,
    ThetaTooLarge,
    WeightSum,
    ZeroDegree,
)
from community_spectra.models import ModelSpec, ParamAtom, RankQStructure
from community_spectra.utils import largest_remainder_counts

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-12


def build_model(atoms: Sequence[ParamAtom], n: int) -> ModelSpec:
    """Validate an atom set and compute 2m and c.

    Args:
        atoms: Weighted parameter vectors
        n: Number of vertices

    Returns:
        Validated ModelSpec

    Raises:
        ModelError: On empty atoms, mixed dimensions or non-positive weights
        NegativeProduct: If any k_a.k_b < 0
        WeightSum: If weights do not sum to 1 within 1e-12
        ZeroDegree: If the average degree is 0
    """
    if n < 1:
        raise ModelError(f"n must be a positive integer, got {n}")
    if not atoms:
        raise ModelError("at least one atom is required")

    dims = {len(a.k) for a in atoms}
    if len(dims) != 1:
        raise ModelError(f"atoms have mixed dimensions {sorted(dims)}")
    q = dims.pop()
    if q < 1:
        raise ModelError("atom vectors must have at least one component")

    atoms = tuple(
        ParamAtom(k=tuple(float(v) for v in a.k), weight=float(a.weight), group=a.group)
        for a in atoms
    )
    weights = np.array([a.weight for a in atoms])
    if np.any(weights <= 0) or np.any(weights > 1):
        raise ModelError("atom weights must lie in (0, 1]")
    total = float(weights.sum())
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise WeightSum(total)

    vectors = np.array([a.k for a in atoms])
    products = vectors @ vectors.T
    negative = np.argwhere(products < 0)
    if len(negative):
        a, b = (int(v) for v in negative[0])
        raise NegativeProduct(min(a, b), max(a, b), float(products[a, b]))

    mean = weights @ vectors
    c = float(np.linalg.norm(mean))
    if c == 0.0:
        raise ZeroDegree()
    two_m = n * c

    logger.debug(f"Built model: n={n}, q={q}, atoms={len(atoms)}, c={c:.6g}")
    return ModelSpec(n=n, q=q, atoms=atoms, two_m=two_m, c=c)


def build_two_community_model(
    kappa_atoms: Sequence[tuple[float, float]],
    theta: float,
    n: int
) -> ModelSpec:
    """Two equal groups with vectors (kappa, +theta) and (kappa, -theta).

    Args:
        kappa_atoms: (kappa, weight) pairs of the expected-degree distribution
        theta: Community strength, 0 <= theta <= min kappa
        n: Number of vertices

    Returns:
        ModelSpec with 2 * len(kappa_atoms) atoms

    Raises:
        ThetaTooLarge: If some kappa < theta
    """
    if theta < 0:
        raise ModelError(f"theta must be >= 0, got {theta}")
    atoms = []
    for kappa, weight in kappa_atoms:
        if kappa <= 0:
            raise ModelError(f"kappa must be positive, got {kappa}")
        if kappa < theta:
            raise ThetaTooLarge(kappa, theta)
    for group, sign in ((0, 1.0), (1, -1.0)):
        for kappa, weight in kappa_atoms:
            atoms.append(ParamAtom(k=(float(kappa), sign * float(theta)), weight=weight / 2.0, group=group))
    return build_model(atoms, n)


def simplex_directions(q: int, phi: float) -> np.ndarray:
    """q unit vectors with pairwise angle phi.

    Built from the Cholesky factor of the Gram matrix
    (1 - cos phi) I + cos phi 11^T, so v_r.v_s = cos phi exactly for r != s.

    Args:
        q: Number of directions
        phi: Pairwise angle in radians, 0 <= phi <= pi/2

    Returns:
        (q, q) array whose rows are the unit vectors
    """
    cos_phi = math.cos(phi)
    gram = (1.0 - cos_phi) * np.eye(q) + cos_phi * np.ones((q, q))
    if cos_phi >= 1.0:
        # phi = 0: all directions equal, Gram matrix is rank one
        directions = np.zeros((q, q))
        directions[:, 0] = 1.0
        return directions
    return np.linalg.cholesky(gram)


def build_simplex_model(
    q: int,
    phi: float,
    magnitude_atoms: Sequence[tuple[float, float]],
    n: int
) -> ModelSpec:
    """Vectors k = k v_r pointing at the corners of a regular simplex.

    Each group r carries weight 1/q and the same magnitude distribution, so
    k_a.k_b = k_a k_b [delta_rs + (1 - delta_rs) cos phi].

    Args:
        q: Number of groups
        phi: Angle between group directions (radians)
        magnitude_atoms: (magnitude, weight) pairs
        n: Number of vertices

    Returns:
        ModelSpec with q * len(magnitude_atoms) atoms

    Raises:
        BadAngle: If cos(phi) < 0 or phi outside [0, pi/2]
    """
    if q < 1:
        raise ModelError(f"q must be a positive integer, got {q}")
    if phi < 0 or phi > math.pi / 2 + 1e-15 or math.cos(phi) < -1e-15:
        raise BadAngle(phi)
    directions = simplex_directions(q, min(phi, math.pi / 2))
    atoms = []
    for r in range(q):
        for magnitude, weight in magnitude_atoms:
            if magnitude <= 0:
                raise ModelError(f"magnitudes must be positive, got {magnitude}")
            atoms.append(ParamAtom(
                k=tuple(float(magnitude) * directions[r]),
                weight=weight / q,
                group=r
            ))
    # Cholesky rows can carry -0.0 / 1e-17 noise; products are clipped at 0 on the
    # between-group diagonal only when phi = pi/2
    if abs(math.cos(phi)) < 1e-15:
        atoms = [
            ParamAtom(k=tuple(0.0 if abs(v) < 1e-15 else v for v in a.k), weight=a.weight, group=a.group)
            for a in atoms
        ]
    return build_model(atoms, n)


def rank_structure(model: ModelSpec) -> RankQStructure:
    """Eigenvalues alpha_r of <A> from the q x q Gram matrix (1/c) E[k k^T].

    The nonzero eigenvalues of <A> = K K^T / 2m equal those of K^T K / 2m, so
    the n x n matrix is never formed.

    Args:
        model: Validated model

    Returns:
        RankQStructure with alphas sorted descending
    """
    vectors = model.vectors
    gram = (vectors.T * model.weights) @ vectors / model.c
    gram = 0.5 * (gram + gram.T)
    alphas = np.linalg.eigvalsh(gram)[::-1]
    # PSD by construction; clip rounding noise
    alphas = np.where(np.abs(alphas) < 1e-13 * max(1.0, abs(alphas[0])), 0.0, alphas)
    return RankQStructure(alphas=tuple(float(a) for a in alphas), gram=gram)


def vertex_counts(model: ModelSpec, n: Optional[int] = None) -> np.ndarray:
    """Largest-remainder vertex counts per atom."""
    return largest_remainder_counts(model.weights, model.n if n is None else n)


def vertex_vectors(model: ModelSpec, n: Optional[int] = None) -> np.ndarray:
    """(n, q) array of per-vertex parameter vectors in block order."""
    counts = vertex_counts(model, n)
    return np.repeat(model.vectors, counts, axis=0)


def expected_adjacency(model: ModelSpec, n: Optional[int] = None, zero_diagonal: bool = False) -> np.ndarray:
    """Dense <A> with elements k_i.k_j / 2m for small n.

    2m = n c, the normalization the sampler uses.  When the weights times n
    are integers the nonzero eigenvalues equal the Gram eigenvalues exactly.

    Args:
        model: Validated model
        n: Vertex count (defaults to model.n; keep it small)
        zero_diagonal: Drop the i = i terms, matching the self-loop-free sampler

    Returns:
        (n, n) symmetric array
    """
    vectors = vertex_vectors(model, n)
    two_m = model.c * len(vectors)
    mean_adj = vectors @ vectors.T / two_m
    if zero_diagonal:
        np.fill_diagonal(mean_adj, 0.0)
    return mean_adj


def scale_model(model: ModelSpec, s: float) -> ModelSpec:
    """Multiply every atom vector by s > 0."""
    if s <= 0:
        raise ModelError(f"scale must be positive, got {s}")
    atoms = [
        ParamAtom(k=tuple(s * v for v in a.k), weight=a.weight, group=a.group)
        for a in model.atoms
    ]
    return build_model(atoms, model.n)


def with_n(model: ModelSpec, n: int) -> ModelSpec:
    """Same atom distribution with a different vertex count."""
    return build_model(model.atoms, n)
