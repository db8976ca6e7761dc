"""Reader and writer for sampled-graph CSV files and their JSON sidecars.

The edge file has the header `i,j,multiplicity` with 0-based vertex ids and
i < j.  The sidecar `<file>.json` holds `{n, seed, labels, atom_groups}`.
"""

import csv
import json
import sys
from pathlib import Path
from typing import Union

import numpy as np

from community_spectra.errors import ConfigError
from community_spectra.models import SampledGraph

HEADER = ['i', 'j', 'multiplicity']


def sidecar_path(path: Union[str, Path]) -> Path:
    """Path of the JSON sidecar belonging to a graph CSV."""
    path = Path(path)
    return path.with_name(path.name + '.json')


def write_graph(graph: SampledGraph, path: Union[str, Path]) -> Path:
    """Write the edge list CSV and its sidecar.

    Args:
        graph: Sampled graph
        path: Destination CSV path

    Returns:
        Path of the sidecar file
    """
    path = Path(path)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(HEADER)
        for i, j, m in graph.edges:
            writer.writerow([int(i), int(j), int(m)])

    side = sidecar_path(path)
    meta = {
        'n': graph.n,
        'seed': graph.seed,
        'labels': [int(v) for v in graph.labels],
    }
    if graph.atom_groups is not None:
        meta['atom_groups'] = [int(v) for v in graph.atom_groups]
    side.write_text(json.dumps(meta, sort_keys=True))
    return side


def read_graph(path: Union[str, Path]) -> SampledGraph:
    """Read a graph CSV (and sidecar, when present).

    Without a sidecar n is taken as max vertex id + 1 and all labels are 0.

    Raises:
        ConfigError: On a missing file, bad header or invalid rows
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"graph file not found: {path}")

    rows = []
    with open(path, newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != HEADER:
            raise ConfigError(f"{path}: expected header {','.join(HEADER)}, got {header}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                i, j, m = (int(v) for v in row)
            except ValueError:
                raise ConfigError(f"{path}:{line_no}: expected three integers, got {row}")
            if i == j or i < 0 or j < 0 or m < 1:
                raise ConfigError(f"{path}:{line_no}: invalid edge {row}")
            rows.append((min(i, j), max(i, j), m))

    edges = np.array(rows, dtype=np.int64).reshape(-1, 3)
    if len(edges):
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        edges = edges[order]

    side = sidecar_path(path)
    atom_groups = None
    if side.exists():
        try:
            meta = json.loads(side.read_text())
            n = int(meta['n'])
            seed = int(meta.get('seed', 0))
            labels = np.asarray(meta.get('labels', [0] * n), dtype=np.int64)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"{side}: malformed sidecar: {e}")
        if 'atom_groups' in meta:
            atom_groups = np.asarray(meta['atom_groups'], dtype=np.int64)
    else:
        n = int(edges[:, :2].max()) + 1 if len(edges) else 0
        seed = 0
        labels = np.zeros(n, dtype=np.int64)

    if len(labels) != n:
        raise ConfigError(f"{side}: {len(labels)} labels for n={n}")
    if len(edges) and edges[:, 1].max() >= n:
        raise ConfigError(f"{path}: vertex id {int(edges[:, 1].max())} out of range for n={n}")

    return SampledGraph(n=n, edges=edges, labels=labels, seed=seed, atom_groups=atom_groups)


def write_columns(path, columns: dict) -> None:
    """Write equal-length columns as a CSV (stdout when path is None or '-')."""
    names = list(columns)
    values = [np.asarray(columns[name]) for name in names]
    handle = sys.stdout if path in (None, '-') else open(path, 'w', newline='')
    try:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(names)
        for row in zip(*values):
            writer.writerow([_format_cell(v) for v in row])
    finally:
        if handle is not sys.stdout:
            handle.close()


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))
