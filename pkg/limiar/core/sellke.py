"""
Sellke threshold construction of the final size.

One :class:`SellkeDraw` fixes an infectious period ``T_i ~ Exp(rho)``, a
resistance ``Q_i ~ Exp(1)`` and a seeding order for every vertex. A vertex
becomes infected once the exposure ``beta * sum_j G_ij T_j`` accumulated from
its infected neighbours exceeds ``Q_i``. The infected set is the least fixed
point of that rule, so it grows monotonically with the number of seeds and a
sweep over ``m`` can reuse the previous infected set.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence

import numpy as np

from ..log import get_logger
from ..models import Multigraph

logger = get_logger(__name__)


class VisitOrder(str, Enum):
    """Work-queue discipline; the fixed point does not depend on it."""

    FIFO = "fifo"
    LIFO = "lifo"


@dataclass(frozen=True, eq=False)
class SellkeDraw:
    """Immutable randomness of one Sellke realisation.

    Attributes:
        infectious_periods: ``T_i``; ``inf`` for every vertex when ``rho == 0``.
        thresholds: Resistances ``Q_i > 0``.
        permutation: Seeding order; the first ``m`` entries are the seeds.
    """

    infectious_periods: np.ndarray
    thresholds: np.ndarray
    permutation: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.infectious_periods, dtype=float, copy=True)
        q = np.array(self.thresholds, dtype=float, copy=True)
        p = np.array(self.permutation, dtype=np.int64, copy=True)
        if not (t.shape == q.shape == p.shape) or t.ndim != 1:
            raise ValueError("draw arrays must be one-dimensional and of equal length")
        if np.any(~(t > 0)) or np.any(~(q > 0)):
            raise ValueError("infectious periods and thresholds must be positive")
        if not np.array_equal(np.sort(p), np.arange(p.size)):
            raise ValueError("permutation must be a bijection on 0..n-1")
        for name, arr in (("infectious_periods", t), ("thresholds", q), ("permutation", p)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return int(self.permutation.size)

    @classmethod
    def sample(cls, n: int, rho: float, rng: np.random.Generator) -> "SellkeDraw":
        if rho < 0:
            raise ValueError("rho must be >= 0")
        if rho == 0:
            periods = np.full(n, np.inf)
        else:
            periods = rng.exponential(1.0 / rho, size=n)
        # Exp(1) can round to 0.0
        tiny = np.finfo(float).tiny
        periods = np.maximum(periods, tiny)
        thresholds = np.maximum(rng.standard_exponential(size=n), tiny)
        return cls(periods, thresholds, rng.permutation(n))

    def with_seeds_first(self, seeds: Sequence[int]) -> "SellkeDraw":
        """Same periods and thresholds, ``seeds`` moved to the front of the order."""
        seeds = np.asarray(seeds, dtype=np.int64)
        rest = self.permutation[~np.isin(self.permutation, seeds)]
        return SellkeDraw(
            self.infectious_periods, self.thresholds, np.concatenate((seeds, rest))
        )


class _SellkeState:
    """Mutable infected set and exposures for one graph and draw."""

    def __init__(
        self,
        graph: Multigraph,
        draw: SellkeDraw,
        beta: float,
        order: VisitOrder,
        immune: np.ndarray | None,
    ) -> None:
        if draw.n != graph.n:
            raise ValueError("draw and graph differ in vertex count")
        if beta <= 0:
            raise ValueError("beta must be > 0")
        offsets, nbrs, _, _ = graph.as_lists
        self.offsets = offsets
        self.nbrs = nbrs
        self.push = (beta * draw.infectious_periods).tolist()
        self.thresholds = draw.thresholds.tolist()
        self.exposure = np.zeros(graph.n, dtype=np.longdouble)
        self.infected = [False] * graph.n
        self.immune = [False] * graph.n if immune is None else [bool(x) for x in immune]
        self.count = 0
        self.lifo = VisitOrder(order) is VisitOrder.LIFO

    def seed(self, v: int) -> None:
        """Infect ``v`` unconditionally and propagate."""
        if self.infected[v] or self.immune[v]:
            return
        self.infected[v] = True
        self.count += 1
        self._propagate(deque([v]))

    def _propagate(self, queue: deque) -> None:
        offsets, nbrs = self.offsets, self.nbrs
        infected, immune, exposure = self.infected, self.immune, self.exposure
        thresholds = self.thresholds
        while queue:
            v = queue.pop() if self.lifo else queue.popleft()
            push = self.push[v]
            for h in range(offsets[v], offsets[v + 1]):
                u = nbrs[h]
                if u == v or infected[u] or immune[u]:
                    continue
                exposure[u] += push
                # strict: ties have probability zero
                if thresholds[u] < exposure[u]:
                    infected[u] = True
                    self.count += 1
                    queue.append(u)

    def infected_ids(self) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.infected, dtype=bool))


def sellke_final_size(
    graph: Multigraph,
    draw: SellkeDraw,
    m: int,
    beta: float,
    order: VisitOrder = VisitOrder.FIFO,
    immune: np.ndarray | None = None,
) -> tuple[int, np.ndarray]:
    """Final size when the first ``m`` vertices of the draw's order are seeds.

    Args:
        graph: Graph to spread on.
        draw: Periods, thresholds and seeding order.
        m: Number of seeds, ``1 <= m <= n``.
        beta: Infection rate.
        order: Work-queue discipline.
        immune: Optional boolean mask of initially recovered vertices, which
            are never infected and never seeded.

    Returns:
        tuple: ``(new_infections, infected_vertex_ids)``; seeds are in the set
        but not in the count.
    """
    if not 1 <= m <= graph.n:
        raise ValueError(f"m must lie in [1, {graph.n}]")
    state = _SellkeState(graph, draw, beta, order, immune)
    seeded = 0
    for v in draw.permutation[:m].tolist():
        if not state.immune[v]:
            seeded += 1
        state.seed(v)
    # a seed already infected by an earlier one still counts as a seed
    return state.count - seeded, state.infected_ids()


def sellke_sweep(
    graph: Multigraph,
    draw: SellkeDraw,
    m_values: Sequence[int],
    beta: float,
    order: VisitOrder = VisitOrder.FIFO,
) -> List[tuple[int, int]]:
    """Total infected count ``Z(m)`` (seeds included) for ascending ``m``.

    The infected set of the previous ``m`` is extended in place: seeding the
    extra vertices and propagating reaches the same least fixed point as a
    cold start.
    """
    ms = [int(m) for m in m_values]
    if any(b < a for a, b in zip(ms, ms[1:])):
        raise ValueError("m_values must be ascending")
    if ms and not (1 <= ms[0] and ms[-1] <= graph.n):
        raise ValueError(f"m_values must lie in [1, {graph.n}]")
    state = _SellkeState(graph, draw, beta, order, None)
    perm = draw.permutation.tolist()
    out: List[tuple[int, int]] = []
    seeded = 0
    for m in ms:
        for v in perm[seeded:m]:
            state.seed(v)
        seeded = max(seeded, m)
        out.append((m, state.count))
    logger.debug("sellke sweep over %d seed counts, final Z = %s", len(ms), out[-1][1] if out else None)
    return out


def seed_degree_prefix(graph: Multigraph, draw: SellkeDraw) -> np.ndarray:
    """``X_I0(m)``: total degree of the first ``m`` seeds, indexed by ``m``."""
    return np.concatenate(([0], np.cumsum(graph.degrees[draw.permutation])))
