"""Utility functions shared by the model, sampler, solvers and CLI."""

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, Sequence, TypeVar

import numpy as np

from community_spectra.errors import ConfigError

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def largest_remainder_counts(weights: Sequence[float], n: int) -> np.ndarray:
    """Split n vertices over atoms proportionally to their weights.

    Args:
        weights: Atom weights summing to one
        n: Number of vertices

    Returns:
        Integer counts summing exactly to n
    """
    quotas = np.asarray(weights, dtype=float) * n
    counts = np.floor(quotas).astype(np.int64)
    remaining = int(n - counts.sum())
    if remaining > 0:
        # ties resolved by atom order
        order = np.argsort(-(quotas - counts), kind='stable')
        counts[order[:remaining]] += 1
    return counts


def block_offsets(counts: Sequence[int]) -> np.ndarray:
    """First vertex id of each contiguous block."""
    return np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)


def canonical_json(data: Any) -> str:
    """Serialize to JSON with sorted keys and compact separators."""
    return json.dumps(data, sort_keys=True, separators=(',', ':'), default=_json_default)


def config_hash(config: Any) -> str:
    """SHA-256 of the canonical JSON form of a configuration."""
    return hashlib.sha256(canonical_json(config).encode('utf-8')).hexdigest()


def _json_default(value: Any):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def to_json(data: Any) -> str:
    """Pretty JSON for output files, tolerant of numpy scalars."""
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default)


def resolve_threads(threads: int) -> int:
    """Map the --threads flag to a worker count (0 = all CPUs)."""
    if threads < 0:
        raise ConfigError(f"threads must be >= 0, got {threads}")
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: int = 0) -> list[R]:
    """Apply func to items concurrently, returning results in input order.

    Args:
        func: Function to apply
        items: Inputs
        threads: Worker count (0 = all CPUs, 1 = run serially)

    Returns:
        List of results aligned with items
    """
    items = list(items)
    workers = resolve_threads(threads)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def parse_sweep(text: str) -> np.ndarray:
    """Parse a 'lo:hi:steps' sweep argument.

    Args:
        text: Sweep string, e.g. '0:60:31'

    Returns:
        Evenly spaced sweep values

    Raises:
        ConfigError: On malformed input
    """
    parts = text.split(':')
    if len(parts) != 3:
        raise ConfigError(f"sweep must look like lo:hi:steps, got '{text}'")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"sweep must look like lo:hi:steps, got '{text}'")
    if steps < 2 or not hi > lo:
        raise ConfigError(f"sweep needs hi > lo and at least 2 steps, got '{text}'")
    return np.linspace(lo, hi, steps)


def relative_error(value: float, reference: float) -> float:
    """|value - reference| / |reference| (absolute error when reference is 0)."""
    if reference == 0:
        return abs(value)
    return abs(value - reference) / abs(reference)
