"""
Plain-text graph dumps.

Format: a header line ``n m`` followed by one ``u v`` line per edge,
0-indexed, in construction order; a loop is written ``v v``. Loading a dump
gives back the same edge order, so dumps of equal graphs hash equally.
"""

import os
import tempfile
from pathlib import Path

import numpy as np

from limiar.errors import ConfigError
from limiar.models import Multigraph


def dump_graph(graph: Multigraph, path: str | Path) -> None:
    """Write ``graph`` to ``path`` atomically."""
    path = Path(path)
    lines = [f"{graph.n} {graph.m}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges.tolist())
    content = "\n".join(lines) + "\n"

    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        os.replace(tmp_path, str(path))
    finally:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)


def load_graph(path: str | Path) -> Multigraph:
    """
    Read a dump written by :func:`dump_graph`.

    Raises:
        ConfigError: If the file is missing or malformed.
    """
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as f:
            header = f.readline().split()
            if len(header) != 2:
                raise ConfigError(f"{path}: header must be 'n m'")
            n, m = int(header[0]), int(header[1])
            edges = np.loadtxt(f, dtype=np.int64, ndmin=2) if m else np.zeros((0, 2), np.int64)
    except FileNotFoundError as exc:
        raise ConfigError(f"graph file not found: {path}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed graph dump ({exc})") from exc
    if edges.shape != (m, 2):
        raise ConfigError(f"{path}: header announces {m} edges, found {edges.shape[0]}")
    try:
        return Multigraph.from_edges(n, edges)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
