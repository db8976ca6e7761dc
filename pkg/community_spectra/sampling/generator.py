"""Seeded multigraph sampler for the Poisson community model.

For every unordered block pair (a, b) the total number of edges is drawn
Poisson with the block mean, then endpoints are placed uniformly inside the
two blocks.  Each pair draws from its own Philox substream keyed by
(seed, a, b), so the result does not depend on the worker count.
"""

import logging

import numpy as np

from community_spectra.model import vertex_counts
from community_spectra.models import DegreeStats, ModelSpec, SampledGraph
from community_spectra.utils import block_offsets, parallel_map

logger = logging.getLogger(__name__)


def block_pair_rng(seed: int, a: int, b: int) -> np.random.Generator:
    """Counter-based generator for the (a, b) block pair."""
    sequence = np.random.SeedSequence(seed, spawn_key=(a, b))
    return np.random.Generator(np.random.Philox(sequence))


def block_mean(model: ModelSpec, counts: np.ndarray, a: int, b: int) -> float:
    """Expected number of edges between blocks a and b (within a if a == b)."""
    product = float(np.dot(model.atoms[a].k, model.atoms[b].k))
    if a == b:
        pairs = counts[a] * (counts[a] - 1) / 2.0
    else:
        pairs = float(counts[a]) * float(counts[b])
    return pairs * product / model.two_m


def _sample_block_pair(model, counts, offsets, seed, a, b) -> np.ndarray:
    mean = block_mean(model, counts, a, b)
    if mean <= 0.0:
        return np.empty((0, 2), dtype=np.int64)

    rng = block_pair_rng(seed, a, b)
    total = int(rng.poisson(mean))
    if total == 0:
        return np.empty((0, 2), dtype=np.int64)

    u = offsets[a] + rng.integers(0, counts[a], size=total)
    v = offsets[b] + rng.integers(0, counts[b], size=total)
    if a == b:
        clash = u == v
        while clash.any():
            v[clash] = offsets[b] + rng.integers(0, counts[b], size=int(clash.sum()))
            clash = u == v
    return np.column_stack([np.minimum(u, v), np.maximum(u, v)])


def sample_graph(model: ModelSpec, seed: int, threads: int = 1) -> SampledGraph:
    """Draw one multigraph from the model.

    Args:
        model: Validated model
        seed: Non-negative integer seed
        threads: Worker count for block pairs (0 = all CPUs)

    Returns:
        SampledGraph with lexicographically sorted (i, j, multiplicity) rows
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")

    n = model.n
    counts = vertex_counts(model)
    offsets = block_offsets(counts)
    num_atoms = len(model.atoms)
    pairs = [(a, b) for a in range(num_atoms) for b in range(a, num_atoms)]

    logger.info(f"Sampling n={n}, {num_atoms} blocks, {len(pairs)} block pairs, seed={seed}")
    chunks = parallel_map(
        lambda ab: _sample_block_pair(model, counts, offsets, seed, *ab),
        pairs,
        threads
    )

    endpoints = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    if len(endpoints):
        keys = endpoints[:, 0] * np.int64(n) + endpoints[:, 1]
        unique_keys, multiplicity = np.unique(keys, return_counts=True)
        edges = np.column_stack([
            unique_keys // n,
            unique_keys % n,
            multiplicity
        ]).astype(np.int64)
    else:
        edges = np.empty((0, 3), dtype=np.int64)

    labels = np.repeat(np.arange(num_atoms, dtype=np.int64), counts)
    graph = SampledGraph(
        n=n,
        edges=edges,
        labels=labels,
        seed=seed,
        atom_groups=model.groups
    )
    logger.info(f"Sampled {graph.num_edges} edges ({len(edges)} distinct pairs)")
    return graph


def degree_stats(graph: SampledGraph) -> list[DegreeStats]:
    """Mean and variance of degree per atom label, multiplicities counted."""
    degrees = graph.degrees()
    stats = []
    for label in np.unique(graph.labels):
        mask = graph.labels == label
        values = degrees[mask].astype(float)
        stats.append(DegreeStats(
            label=int(label),
            mean=float(values.mean()) if len(values) else 0.0,
            variance=float(values.var()) if len(values) else 0.0,
            count=int(mask.sum())
        ))
    return stats


def expected_edge_count(model: ModelSpec) -> float:
    """Sum of the block means, i.e. the expected total edge count."""
    counts = vertex_counts(model)
    num_atoms = len(model.atoms)
    return float(sum(
        block_mean(model, counts, a, b)
        for a in range(num_atoms) for b in range(a, num_atoms)
    ))
