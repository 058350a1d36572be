"""
Random graph construction.

Provides the configuration-model multigraph (uniform matching of half-edges),
the simple graph with a given degree sequence (by rejection), G(n, p) and
G(n, m), Poisson degree sequences, and the initial S/I/R assignment of the
vertices. Every sampler takes an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterator, List, Sequence

import numpy as np

from ..errors import (
    AttemptsExhausted,
    NotGraphical,
    OddTotalDegree,
    SpecMismatch,
)
from ..log import get_logger
from ..models import DegreeConfiguration, Multigraph, VertexState

logger = get_logger(__name__)

DEFAULT_MAX_ATTEMPTS = 1000
DENSE_PAIR_LIMIT = 2_000_000


class StateAssignment(str, Enum):
    """How initial infective/recovered vertices are chosen."""

    UNIFORM_RANDOM = "uniform"
    BY_DEGREE_SPEC = "by_degree"
    HIGH_DEGREE = "high_degree"


def _as_degrees(degrees: Sequence[int] | np.ndarray) -> np.ndarray:
    deg = np.asarray(degrees, dtype=np.int64).ravel()
    if deg.size and deg.min() < 0:
        raise ValueError("degrees must be non-negative")
    return deg


def sample_multigraph(degrees: Sequence[int] | np.ndarray, rng: np.random.Generator) -> Multigraph:
    """Uniformly random perfect matching of the half-edges.

    Shuffling the half-edge array once and pairing consecutive entries gives
    every matching the same probability.

    Raises:
        OddTotalDegree: If the degrees sum to an odd number.
    """
    deg = _as_degrees(degrees)
    total = int(deg.sum())
    if total % 2:
        raise OddTotalDegree(f"total degree {total} is odd")
    stubs = np.repeat(np.arange(deg.size, dtype=np.int64), deg)
    rng.shuffle(stubs)
    return Multigraph.from_edges(deg.size, stubs.reshape(-1, 2))


def is_graphical(degrees: Sequence[int] | np.ndarray) -> bool:
    """Erdős–Gallai test for the existence of a simple graph."""
    deg = _as_degrees(degrees)
    n = deg.size
    if n == 0:
        return True
    if int(deg.sum()) % 2 or deg.max() >= n:
        return False
    d = np.sort(deg)[::-1]
    cs = np.concatenate(([0], np.cumsum(d)))
    k = np.arange(1, n + 1)
    # number of entries >= k in the descending sequence
    at_least = np.searchsorted(-d, -k, side="right")
    j = np.maximum(at_least, k)
    rhs = k * (k - 1) + k * (j - k) + (cs[n] - cs[j])
    return bool(np.all(cs[1:] <= rhs))


def is_simple(graph: Multigraph) -> bool:
    """True if the graph has neither loops nor repeated edges."""
    e = graph.edges
    if e.shape[0] == 0:
        return True
    if np.any(e[:, 0] == e[:, 1]):
        return False
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    keys = lo * graph.n + hi
    return np.unique(keys).size == keys.size


def sample_simple_graph(
    degrees: Sequence[int] | np.ndarray,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> Multigraph:
    """Uniform simple graph with the given degrees, by rejection.

    Raises:
        OddTotalDegree: If the degrees sum to an odd number.
        NotGraphical: If no simple graph has these degrees.
        AttemptsExhausted: If ``max_attempts`` multigraphs were all non-simple.
    """
    deg = _as_degrees(degrees)
    if int(deg.sum()) % 2:
        raise OddTotalDegree(f"total degree {int(deg.sum())} is odd")
    if not is_graphical(deg):
        raise NotGraphical("degree sequence fails the Erdős–Gallai test")
    for attempt in range(1, max_attempts + 1):
        graph = sample_multigraph(deg, rng)
        if is_simple(graph):
            logger.debug("simple graph accepted after %d attempt(s)", attempt)
            return graph
    raise AttemptsExhausted(f"no simple graph in {max_attempts} attempts")


def _decode_pairs(n: int, keys: np.ndarray) -> np.ndarray:
    return np.column_stack((keys // n, keys % n))


def _sample_pairs(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` distinct unordered vertex pairs, uniformly, in draw order."""
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    total = n * (n - 1) // 2
    if total <= DENSE_PAIR_LIMIT:
        rows, cols = np.triu_indices(n, k=1)
        idx = rng.choice(total, size=count, replace=False)
        return np.column_stack((rows[idx], cols[idx])).astype(np.int64)
    keys = np.zeros(0, dtype=np.int64)
    while keys.size < count:
        need = count - keys.size
        draw = int(need * 1.05) + 16
        u = rng.integers(0, n, size=draw)
        v = rng.integers(0, n, size=draw)
        keep = u != v
        lo = np.minimum(u[keep], v[keep])
        hi = np.maximum(u[keep], v[keep])
        keys = np.concatenate((keys, lo * n + hi))
        _, first = np.unique(keys, return_index=True)
        keys = keys[np.sort(first)]
    return _decode_pairs(n, keys[:count])


def sample_gnp(n: int, p: float, rng: np.random.Generator) -> Multigraph:
    """Erdős–Rényi G(n, p): every pair joined independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    total = n * (n - 1) // 2
    count = int(rng.binomial(total, p)) if total else 0
    return Multigraph.from_edges(n, _sample_pairs(n, count, rng))


def sample_gnm(n: int, m: int, rng: np.random.Generator) -> Multigraph:
    """Uniform simple graph with exactly ``m`` edges."""
    total = n * (n - 1) // 2
    if not 0 <= m <= total:
        raise ValueError(f"m must lie in [0, {total}]")
    return Multigraph.from_edges(n, _sample_pairs(n, m, rng))


def sample_poisson_degrees(n: int, mean: float, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. Poisson(mean) degrees; one vertex gets +1 if the total is odd."""
    deg = rng.poisson(mean, size=n).astype(np.int64)
    if int(deg.sum()) % 2:
        v = int(rng.integers(n))
        deg[v] += 1
        logger.debug("parity repair: degree of vertex %d raised to %d", v, deg[v])
    return deg


def assign_initial_states(
    degrees: Sequence[int] | np.ndarray,
    n_I: int,
    n_R: int,
    mode: StateAssignment,
    spec: DegreeConfiguration | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """Assign S/I/R states to the vertices of a realised degree sequence.

    Args:
        degrees: Realised per-vertex degrees.
        n_I: Number of infective vertices (ignored in ``BY_DEGREE_SPEC`` mode).
        n_R: Number of recovered vertices (ignored in ``BY_DEGREE_SPEC`` mode).
        mode: ``UNIFORM_RANDOM`` picks vertices uniformly; ``HIGH_DEGREE``
            puts the infectives on the largest degrees; ``BY_DEGREE_SPEC``
            reproduces the per-degree counts of ``spec`` exactly.
        spec: Required in ``BY_DEGREE_SPEC`` mode.
        rng: Random generator.

    Returns:
        numpy.ndarray: ``int8`` array of :class:`VertexState` values.

    Raises:
        SpecMismatch: If the counts cannot be realised on these degrees.
    """
    deg = _as_degrees(degrees)
    n = deg.size
    states = np.full(n, VertexState.SUSCEPTIBLE, dtype=np.int8)
    mode = StateAssignment(mode)

    if mode is StateAssignment.BY_DEGREE_SPEC:
        if spec is None:
            raise SpecMismatch("by-degree assignment needs a degree configuration")
        realised = np.bincount(deg, minlength=1)
        wanted = spec.n_by_degree
        for k in sorted(set(wanted) | set(np.flatnonzero(realised).tolist())):
            have = int(realised[k]) if k < realised.size else 0
            if have != wanted.get(k, 0):
                raise SpecMismatch(f"degree {k}: graph has {have} vertices, spec needs {wanted.get(k, 0)}")
        order = np.argsort(deg, kind="stable")
        bounds = np.concatenate(([0], np.cumsum(np.bincount(deg, minlength=1))))
        for k in wanted:
            group = order[bounds[k] : bounds[k + 1]].copy()
            rng.shuffle(group)
            i_k = spec.n_I_by_degree.get(k, 0)
            r_k = spec.n_R_by_degree.get(k, 0)
            states[group[:i_k]] = VertexState.INFECTIVE
            states[group[i_k : i_k + r_k]] = VertexState.RECOVERED
        return states

    if n_I < 0 or n_R < 0 or n_I + n_R > n:
        raise SpecMismatch(f"cannot place {n_I} infective and {n_R} recovered among {n} vertices")
    if mode is StateAssignment.HIGH_DEGREE:
        # random tie-break among equal degrees
        order = np.lexsort((rng.random(n), -deg))
        states[order[:n_I]] = VertexState.INFECTIVE
        rest = order[n_I:].copy()
        rng.shuffle(rest)
        states[rest[:n_R]] = VertexState.RECOVERED
        return states
    perm = rng.permutation(n)
    states[perm[:n_I]] = VertexState.INFECTIVE
    states[perm[n_I : n_I + n_R]] = VertexState.RECOVERED
    return states


def configuration_from_states(
    degrees: Sequence[int] | np.ndarray, states: np.ndarray, beta: float, rho: float
) -> DegreeConfiguration:
    """Per-degree state counts of a realised graph."""
    deg = _as_degrees(degrees)
    states = np.asarray(states)
    if states.shape != deg.shape:
        raise SpecMismatch("states and degrees differ in length")

    def counts(state: VertexState) -> dict:
        sel = deg[states == state]
        if sel.size == 0:
            return {}
        hist = np.bincount(sel)
        nz = np.flatnonzero(hist)
        return dict(zip(nz.tolist(), hist[nz].tolist()))

    return DegreeConfiguration(
        n_S_by_degree=counts(VertexState.SUSCEPTIBLE),
        n_I_by_degree=counts(VertexState.INFECTIVE),
        n_R_by_degree=counts(VertexState.RECOVERED),
        beta=beta,
        rho=rho,
    )


def degrees_from_configuration(config: DegreeConfiguration) -> tuple[np.ndarray, np.ndarray]:
    """Canonical per-vertex realisation of a configuration.

    Vertices are listed susceptible first, then infective, then recovered,
    each block in ascending degree order.
    """
    degrees: List[np.ndarray] = []
    states: List[np.ndarray] = []
    for state, counts in (
        (VertexState.SUSCEPTIBLE, config.n_S_by_degree),
        (VertexState.INFECTIVE, config.n_I_by_degree),
        (VertexState.RECOVERED, config.n_R_by_degree),
    ):
        for k, c in sorted(counts.items()):
            degrees.append(np.full(c, k, dtype=np.int64))
            states.append(np.full(c, state, dtype=np.int8))
    return np.concatenate(degrees), np.concatenate(states)


def iter_matchings(degrees: Sequence[int] | np.ndarray) -> Iterator[Multigraph]:
    """Every perfect matching of the half-edges, each yielded once.

    There are ``(2m - 1)!!`` of them, so this is only meant for tiny inputs.
    """
    deg = _as_degrees(degrees)
    if int(deg.sum()) % 2:
        raise OddTotalDegree(f"total degree {int(deg.sum())} is odd")
    stubs = np.repeat(np.arange(deg.size), deg).tolist()

    def pair(remaining: List[int], acc: List[tuple[int, int]]) -> Iterator[List[tuple[int, int]]]:
        if not remaining:
            yield acc
            return
        first, rest = remaining[0], remaining[1:]
        for i, other in enumerate(rest):
            yield from pair(rest[:i] + rest[i + 1 :], acc + [(first, other)])

    for edges in pair(stubs, []):
        yield Multigraph.from_edges(deg.size, edges)
