"""
Connected components and the barely supercritical giant-component law.

For a configuration-model graph with ``alpha = sum_k k (k - 2) n_k / n``
slightly positive, the largest component has about ``(2 lambda / gamma) n alpha``
vertices and as many edges, with ``lambda = sum_k k n_k / n`` and
``gamma = sum_k k (k - 1)(k - 2) n_k / n``. Note that this ``alpha`` is a
property of the degree sequence alone and differs from the epidemic
criticality measure in :mod:`limiar.core.degree_model`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ..errors import PreconditionWarning
from ..log import get_logger
from ..models import ComponentSummary, Estimate, Multigraph
from .graph_gen import sample_multigraph

logger = get_logger(__name__)

MIN_WINDOW_SCALE = 1.0


def components(graph: Multigraph) -> ComponentSummary:
    """Exact connected components, largest first.

    Components of equal size are ordered by their lowest vertex index.
    Loops count once and parallel edges by multiplicity in the edge counts.
    """
    n = graph.n
    e = graph.edges
    if n == 0:
        return ComponentSummary((), 0, 0, 0, 0, {}, (), np.zeros(0, dtype=np.int64))
    adj = sparse.coo_matrix(
        (np.ones(e.shape[0], dtype=np.int32), (e[:, 0], e[:, 1])), shape=(n, n)
    ).tocsr()
    count, labels = csgraph.connected_components(adj, directed=False)
    sizes = np.bincount(labels, minlength=count)
    edges = np.bincount(labels[e[:, 0]], minlength=count) if e.shape[0] else np.zeros(count, np.int64)
    lowest = np.full(count, n, dtype=np.int64)
    np.minimum.at(lowest, labels, np.arange(n))
    order = np.lexsort((lowest, -sizes))
    rank = np.empty(count, dtype=np.int64)
    rank[order] = np.arange(count)
    labels = rank[labels]
    sizes = sizes[order]
    edges = edges[order]

    hist = np.bincount(graph.degrees[labels == 0])
    nz = np.flatnonzero(hist)
    return ComponentSummary(
        sizes=tuple(sizes.tolist()),
        c1_vertices=int(sizes[0]),
        c2_vertices=int(sizes[1]) if count > 1 else 0,
        c1_edges=int(edges[0]),
        c2_edges=int(edges[1]) if count > 1 else 0,
        c1_degree_profile=dict(zip(nz.tolist(), hist[nz].tolist())),
        edge_counts=tuple(edges.tolist()),
        labels=labels,
    )


@dataclass(frozen=True)
class GiantConstants:
    """Degree-sequence constants of the giant-component law."""

    n: int
    alpha: float
    lam: float
    gamma: float
    pmf: Dict[int, float]

    @property
    def c1_prediction(self) -> float:
        """Limit of ``|C1| / (n alpha)``; NaN unless ``gamma > 0``."""
        return 2.0 * self.lam / self.gamma if self.gamma > 0 else math.nan

    def degree_prediction(self, k: int) -> float:
        if self.gamma <= 0:
            return math.nan
        return 2.0 * k * self.pmf.get(k, 0.0) / self.gamma


def giant_constants(degrees: Sequence[int] | np.ndarray) -> GiantConstants:
    """Constants of the giant-component law for one degree sequence.

    Args:
        degrees: Per-vertex degrees.

    Returns:
        GiantConstants: ``n``, ``alpha``, ``lambda``, ``gamma`` and the degree pmf.

    Raises:
        ValueError: If the sequence is empty.
    """
    deg = np.asarray(degrees, dtype=np.int64)
    n = deg.size
    if n == 0:
        raise ValueError("empty degree sequence")
    k = deg.astype(float)
    hist = np.bincount(deg)
    nz = np.flatnonzero(hist)
    return GiantConstants(
        n=n,
        alpha=float(np.sum(k * (k - 2)) / n),
        lam=float(np.sum(k) / n),
        gamma=float(np.sum(k * (k - 1) * (k - 2)) / n),
        pmf=dict(zip(nz.tolist(), (hist[nz] / n).tolist())),
    )


def giant_alpha(degrees: Sequence[int] | np.ndarray) -> float:
    """``sum_k k (k - 2) n_k / n`` over all vertices."""
    return giant_constants(degrees).alpha


@dataclass(frozen=True)
class GiantLawReport:
    """Empirical component ratios against the giant-component predictions."""

    constants: GiantConstants
    reps: int
    c1_over_nalpha: Estimate
    c2_over_nalpha: Estimate
    e1_over_nalpha: Estimate
    per_degree: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        c = self.constants
        return {
            "n": c.n,
            "alpha": c.alpha,
            "lambda": c.lam,
            "gamma": c.gamma,
            "reps": self.reps,
            "c1_over_nalpha": self.c1_over_nalpha.to_dict(),
            "c2_over_nalpha": self.c2_over_nalpha.to_dict(),
            "e1_over_nalpha": self.e1_over_nalpha.to_dict(),
            "predicted": {"c1_over_nalpha": c.c1_prediction, "e1_over_nalpha": c.c1_prediction},
            "per_degree": self.per_degree,
        }


def _check_preconditions(c: GiantConstants) -> None:
    if c.alpha <= 0:
        warnings.warn(
            f"alpha = {c.alpha:.6g} is not positive; no giant component is expected",
            PreconditionWarning,
            stacklevel=3,
        )
    elif c.n ** (1.0 / 3.0) * c.alpha < MIN_WINDOW_SCALE:
        warnings.warn(
            f"n^(1/3) alpha = {c.n ** (1.0 / 3.0) * c.alpha:.3g} is inside the critical window",
            PreconditionWarning,
            stacklevel=3,
        )
    if c.pmf.get(1, 0.0) == 0:
        warnings.warn("no vertices of degree 1", PreconditionWarning, stacklevel=3)


def verify_giant_law(
    degrees: Sequence[int] | np.ndarray, reps: int, rng: np.random.Generator
) -> GiantLawReport:
    """Sample ``reps`` multigraphs and compare component sizes with the law.

    Ratios are NaN when ``alpha <= 0``.

    Warns:
        PreconditionWarning: If alpha is not positive, too small for the
            degree count, or no vertex has degree 1.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    deg = np.asarray(degrees, dtype=np.int64)
    c = giant_constants(deg)
    _check_preconditions(c)
    scale = c.n * c.alpha if c.alpha > 0 else math.nan

    c1, c2, e1 = [], [], []
    per_k: Dict[int, List[float]] = {k: [] for k in c.pmf if k > 0}
    for rep in range(reps):
        s = components(sample_multigraph(deg, rng))
        c1.append(s.c1_vertices / scale)
        c2.append(s.c2_vertices / scale)
        e1.append(s.c1_edges / scale)
        for k in per_k:
            per_k[k].append(s.c1_degree_profile.get(k, 0) / scale)
        logger.debug("giant rep %d: |C1| = %d, |C2| = %d", rep, s.c1_vertices, s.c2_vertices)

    per_degree = []
    for k, values in per_k.items():
        est = Estimate.from_samples(values)
        per_degree.append(
            {"k": k, "mean": est.mean, "stderr": est.stderr, "predicted": c.degree_prediction(k)}
        )
    return GiantLawReport(
        constants=c,
        reps=reps,
        c1_over_nalpha=Estimate.from_samples(c1),
        c2_over_nalpha=Estimate.from_samples(c2),
        e1_over_nalpha=Estimate.from_samples(e1),
        per_degree=per_degree,
    )
