"""
SIR epidemic engines.

Three engines share the same final-size law:

- :func:`run_gillespie` -- the continuous-time Markov chain on a fixed graph.
- :func:`run_pairing_dynamic` -- builds the configuration-model graph lazily
  while the epidemic spreads; every free infective half-edge is coloured red
  (it will pair before its vertex recovers) or black, and only red half-edges
  drive the process. Untimed.
- :func:`run_time_changed` -- the same lazy construction in continuous time
  with all rates multiplied by ``(x - 1) / (beta x_I)``, so every free
  susceptible half-edge is hit at rate 1.

Also here: the deterministic half-edge trajectories, the Y(k) sampler, and
exact final-size laws for tiny graphs used as oracles.
"""

from __future__ import annotations

import math
from collections import Counter
from functools import lru_cache
from typing import Dict, List, Sequence

import numpy as np

from ..errors import UnsupportedInitialRecovered
from ..log import get_logger
from ..models import (
    DegreeConfiguration,
    EpidemicOutcome,
    Multigraph,
    TrajectoryRecord,
    VertexState,
)
from .degree_model import CriticalityReport
from .graph_gen import degrees_from_configuration, iter_matchings

logger = get_logger(__name__)

EXACT_MAX_TOTAL_DEGREE = 12

_S = int(VertexState.SUSCEPTIBLE)
_I = int(VertexState.INFECTIVE)
_R = int(VertexState.RECOVERED)


class _IndexedPool:
    """Set of small integers with O(1) add, remove and uniform pick."""

    __slots__ = ("items", "pos")

    def __init__(self, capacity: int) -> None:
        self.items: List[int] = []
        self.pos: List[int] = [-1] * capacity

    def add(self, x: int) -> None:
        self.pos[x] = len(self.items)
        self.items.append(x)

    def remove(self, x: int) -> None:
        i = self.pos[x]
        last = self.items.pop()
        if last != x:
            self.items[i] = last
            self.pos[last] = i
        self.pos[x] = -1

    def __contains__(self, x: int) -> bool:
        return self.pos[x] >= 0

    def __len__(self) -> int:
        return len(self.items)


class _Uniforms:
    """Buffered U[0, 1) draws from a generator."""

    __slots__ = ("rng", "block", "buf", "i")

    def __init__(self, rng: np.random.Generator, block: int = 4096) -> None:
        self.rng = rng
        self.block = block
        self.buf: List[float] = []
        self.i = 0

    def next(self) -> float:
        if self.i >= len(self.buf):
            self.buf = self.rng.random(self.block).tolist()
            self.i = 0
        u = self.buf[self.i]
        self.i += 1
        return u

    def exponential(self, rate: float) -> float:
        return -math.log1p(-self.next()) / rate

    def index(self, size: int) -> int:
        return min(int(self.next() * size), size - 1)


def sample_Y(k: int, beta: float, rho: float, rng: np.random.Generator) -> int:
    """New red half-edges when a degree-``k`` vertex is infected.

    Draws the recovery time ``tau ~ Exp(rho)`` and then
    ``Binomial(k - 1, 1 - exp(-beta tau))``; ``k - 1`` when ``rho == 0``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return 0
    if rho == 0:
        return k - 1
    tau = rng.exponential(1.0 / rho)
    return int(rng.binomial(k - 1, -math.expm1(-beta * tau)))


def sample_Y_many(
    k: int, beta: float, rho: float, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Vectorised :func:`sample_Y`."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if rho == 0 or k == 1:
        return np.full(size, k - 1, dtype=np.int64)
    tau = rng.exponential(1.0 / rho, size=size)
    return rng.binomial(k - 1, -np.expm1(-beta * tau)).astype(np.int64)


def run_gillespie(
    graph: Multigraph,
    states: np.ndarray,
    beta: float,
    rho: float,
    rng: np.random.Generator,
) -> EpidemicOutcome:
    """Exact continuous-time SIR on a fixed graph.

    Each infective-susceptible half-edge pair fires at rate ``beta`` (so
    parallel edges count with multiplicity) and each infective recovers at
    rate ``rho``. Once no susceptible neighbour of an infective is left, the
    remaining infectives only recover; their recovery times are drawn in one
    go. With ``rho == 0`` the duration is the time of the last infection.
    """
    offsets, nbrs, partner, _ = graph.as_lists
    state = [int(s) for s in states]
    if len(state) != graph.n:
        raise ValueError("states must have one entry per vertex")
    degrees = graph.degrees.tolist()

    si = _IndexedPool(len(nbrs))
    infectives = _IndexedPool(graph.n)
    for v, s in enumerate(state):
        if s == _I:
            infectives.add(v)
            for h in range(offsets[v], offsets[v + 1]):
                if state[nbrs[h]] == _S:
                    si.add(h)
    n_initial = len(infectives)

    u = _Uniforms(rng)
    t = 0.0
    final = 0
    by_degree: Dict[int, int] = {}
    last_infection = None
    while len(si):
        rate_inf = beta * len(si)
        total = rate_inf + rho * len(infectives)
        t += u.exponential(total)
        if u.next() * total < rate_inf:
            w = nbrs[si.items[u.index(len(si))]]
            state[w] = _I
            infectives.add(w)
            final += 1
            by_degree[degrees[w]] = by_degree.get(degrees[w], 0) + 1
            last_infection = t
            for h in range(offsets[w], offsets[w + 1]):
                if state[nbrs[h]] == _S:
                    si.add(h)
                else:
                    p = partner[h]
                    if p in si:
                        si.remove(p)
        else:
            v = infectives.items[u.index(len(infectives))]
            state[v] = _R
            infectives.remove(v)
            for h in range(offsets[v], offsets[v + 1]):
                if h in si:
                    si.remove(h)

    duration = t
    if rho > 0 and len(infectives):
        duration = t + float(rng.exponential(1.0 / rho, size=len(infectives)).max())
    return EpidemicOutcome(
        final_size=final,
        final_size_by_degree=dict(sorted(by_degree.items())),
        duration=duration,
        time_scale="original",
        pairing_events=final,
        last_infection_time=last_infection,
        n_initial_infective=n_initial,
    )


def _pick_class(j: int, classes: List[int], susceptible: Dict[int, int]) -> int:
    """Degree class of the ``j``-th free susceptible half-edge."""
    for k in classes:
        weight = k * susceptible[k]
        if j < weight:
            return k
        j -= weight
    raise AssertionError("half-edge index beyond the susceptible total")


def run_pairing_dynamic(
    config: DegreeConfiguration,
    rng: np.random.Generator,
    record: Sequence[int] | None = None,
) -> EpidemicOutcome:
    """Red/black lazy pairing construction of the epidemic on G*(n, (d_i)).

    Every initially infective half-edge is red with the probability that its
    pairing clock beats its vertex's recovery clock (jointly per vertex). A
    red free half-edge is repeatedly paired with a uniformly random other free
    half-edge; hitting a susceptible half-edge infects that vertex, whose
    other ``k - 1`` half-edges are coloured by :func:`sample_Y`. Stops when
    no red free half-edge remains.

    Args:
        config: Initial configuration.
        rng: Random generator.
        record: Pairing-step indices ``m`` at which to sample the red count
            ``Z_m`` (``Z_0`` is the initial red count).
    """
    beta, rho = config.beta, config.rho
    susceptible = {k: c for k, c in config.n_S_by_degree.items() if k > 0}
    classes = sorted(susceptible)
    x_S = config.x_S0
    x_R = config.x_R0

    red = 0
    for k, c in config.n_I_by_degree.items():
        if k > 0:
            # all k half-edges are free, hence Y(k + 1)
            red += int(sample_Y_many(k + 1, beta, rho, rng, c).sum())
    z0 = red
    black = config.x_I0 - red

    wanted = sorted(set(record)) if record else []
    walk: Dict[int, int] = {}
    if wanted and wanted[0] == 0:
        walk[0] = red

    u = _Uniforms(rng)
    final = 0
    events = 0
    by_degree: Dict[int, int] = {}
    while red > 0:
        red -= 1
        others = x_S + red + black + x_R
        j = u.index(others)
        if j < x_S:
            k = _pick_class(j, classes, susceptible)
            susceptible[k] -= 1
            x_S -= k
            final += 1
            by_degree[k] = by_degree.get(k, 0) + 1
            y = sample_Y(k, beta, rho, rng)
            red += y
            black += k - 1 - y
        elif j < x_S + red:
            red -= 1
        elif j < x_S + red + black:
            black -= 1
        else:
            x_R -= 1
        events += 1
        if wanted:
            walk[events] = red

    z_walk = None
    if wanted:
        z_walk = tuple(walk.get(m, 0) if m <= events else 0 for m in wanted)
    return EpidemicOutcome(
        final_size=final,
        final_size_by_degree=dict(sorted(by_degree.items())),
        duration=None,
        time_scale=None,
        pairing_events=events,
        z0_red=z0,
        z_walk=z_walk,
        n_initial_infective=config.n_I,
    )


def deterministic_trajectories(
    config: DegreeConfiguration, grid: Sequence[float] | np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic limits ``(f_S, f_R, f_I)`` of the free half-edge counts.

    Raises:
        UnsupportedInitialRecovered: If the configuration has recovered vertices.
    """
    if config.n_R > 0:
        raise UnsupportedInitialRecovered("trajectory limits assume no initially recovered vertices")
    t = np.asarray(grid, dtype=float)
    ks = np.array(list(config.n_S_by_degree), dtype=float)
    cs = np.array(list(config.n_S_by_degree.values()), dtype=float)
    f_S = (ks * cs * np.exp(-np.outer(t, ks))).sum(axis=1) if ks.size else np.zeros_like(t)
    total = float(config.total_degree)
    f_R = config.rho / config.beta * np.exp(-t) * (1.0 - np.exp(-t)) * total
    f_I = np.exp(-2.0 * t) * total - f_S - f_R
    return f_S, f_R, f_I


def run_time_changed(
    config: DegreeConfiguration,
    rng: np.random.Generator,
    grid: Sequence[float],
) -> tuple[EpidemicOutcome, TrajectoryRecord]:
    """Time-changed epidemic with lazy pairing, recorded on ``grid``.

    In a state with ``x`` free half-edges of which ``x_I`` are infective, free
    infective half-edges pair at total rate ``x - 1`` (each free susceptible
    half-edge is hit at rate 1) and each infective vertex recovers at rate
    ``rho (x - 1) / (beta x_I)``. The run ends at ``tau_end``, the first time
    no free infective half-edge is left; ``duration`` reports ``tau_end``.

    Counts are recorded as right-continuous step functions: the value at a
    grid point is the state after the last event at or before it.
    """
    grid = [float(g) for g in grid]
    if any(g < 0 for g in grid) or grid != sorted(grid):
        raise ValueError("grid must be ascending and non-negative")
    beta, rho = config.beta, config.rho
    susceptible = {k: c for k, c in config.n_S_by_degree.items() if k > 0}
    classes = sorted(susceptible)
    x_S = config.x_S0
    x_R = config.x_R0

    capacity_he = config.x_I0 + x_S
    capacity_v = config.n_I + config.n_S
    pool = _IndexedPool(capacity_he)
    infective = _IndexedPool(capacity_v)
    first_he: List[int] = []
    next_he = 0

    def make_infective(free: int) -> None:
        nonlocal next_he
        v = len(first_he)
        first_he.append(next_he)
        for h in range(next_he, next_he + free):
            pool.add(h)
        next_he += free
        infective.add(v)

    for k, c in config.n_I_by_degree.items():
        for _ in range(c):
            make_infective(k)
    first_he.append(next_he)

    snaps: List[tuple] = []
    gi = 0

    def snapshot() -> tuple:
        return (dict(susceptible), x_S, len(pool), x_R)

    u = _Uniforms(rng)
    t = 0.0
    final = 0
    events = 0
    last_infection = None
    by_degree: Dict[int, int] = {}
    while len(pool):
        x_I = len(pool)
        x = x_S + x_I + x_R
        pair_rate = float(x - 1)
        rec_rate = rho * (x - 1) / (beta * x_I) * len(infective) if rho > 0 else 0.0
        total = pair_rate + rec_rate
        t_next = t + u.exponential(total)
        while gi < len(grid) and grid[gi] < t_next:
            snaps.append(snapshot())
            gi += 1
        t = t_next
        if u.next() * total < pair_rate:
            h = pool.items[u.index(x_I)]
            pool.remove(h)
            j = u.index(x - 1)
            if j < x_S:
                k = _pick_class(j, classes, susceptible)
                susceptible[k] -= 1
                x_S -= k
                final += 1
                by_degree[k] = by_degree.get(k, 0) + 1
                last_infection = t
                # keep the sentinel as the last entry of first_he
                first_he.pop()
                make_infective(k - 1)
                first_he.append(next_he)
            elif j < x_S + x_I - 1:
                pool.remove(pool.items[j - x_S])
            else:
                x_R -= 1
            events += 1
        else:
            v = infective.items[u.index(len(infective))]
            infective.remove(v)
            for h in range(first_he[v], first_he[v + 1]):
                if h in pool:
                    pool.remove(h)
                    x_R += 1
    while gi < len(grid):
        snaps.append(snapshot())
        gi += 1

    if config.n_R == 0:
        f_S, f_R, f_I = (arr.tolist() for arr in deterministic_trajectories(config, grid))
    else:
        f_S = f_R = f_I = [None] * len(grid)
    record = TrajectoryRecord(
        grid=tuple(grid),
        S_k=tuple(s[0] for s in snaps),
        X_S=tuple(s[1] for s in snaps),
        X_I=tuple(s[2] for s in snaps),
        X_R=tuple(s[3] for s in snaps),
        f_S=tuple(f_S),
        f_I=tuple(f_I),
        f_R=tuple(f_R),
    )
    outcome = EpidemicOutcome(
        final_size=final,
        final_size_by_degree=dict(sorted(by_degree.items())),
        duration=t,
        time_scale="time_changed",
        pairing_events=events,
        last_infection_time=last_infection,
        n_initial_infective=config.n_I,
    )
    return outcome, record


def limit_grid(report: CriticalityReport, points: int = 41) -> tuple[np.ndarray, np.ndarray]:
    """Rescaled times ``t`` on ``[0, 2 xi]`` and the matching ``alpha_bar t``."""
    t = np.linspace(0.0, 2.0 * report.xi, points)
    return t, report.alpha_bar * t


def infective_limit_deviation(
    record: TrajectoryRecord,
    report: CriticalityReport,
    n: int,
    tau_end: float,
) -> tuple[float, float]:
    """Sup deviations of the infective half-edge count from its limits.

    Only grid points up to ``tau_end`` are used.

    Returns:
        tuple: ``(max |X_I - f_I| / (n a^2), max |X_I / (n a^2) - f(t)|)``
        with ``a = alpha_bar``.
    """
    a = report.alpha_bar
    scale = n * a * a
    dev_f_I = 0.0
    dev_f = 0.0
    for g, x_I, f_I in zip(record.grid, record.X_I, record.f_I):
        if g > tau_end:
            continue
        if f_I is not None:
            dev_f_I = max(dev_f_I, abs(x_I - f_I) / scale)
        dev_f = max(dev_f, abs(x_I / scale - float(report.f(g / a))))
    return dev_f_I, dev_f


def exact_final_size_distribution(
    graph: Multigraph, states: Sequence[int], beta: float, rho: float
) -> Dict[int, float]:
    """Exact law of the number of new infections on a small fixed graph.

    Recursion over the embedded jump chain: from each state the next event is
    an infection of susceptible ``w`` with probability proportional to
    ``beta`` times the number of infective half-edges pointing at ``w``, or
    the recovery of an infective with probability proportional to ``rho``.
    """
    offsets, nbrs, _, _ = graph.as_lists
    adjacency = [nbrs[offsets[v] : offsets[v + 1]] for v in range(graph.n)]

    @lru_cache(maxsize=None)
    def law(state: tuple) -> Dict[int, float]:
        pressure: Counter = Counter()
        infectives = [v for v, s in enumerate(state) if s == _I]
        for v in infectives:
            for w in adjacency[v]:
                if state[w] == _S:
                    pressure[w] += 1
        total = beta * sum(pressure.values()) + rho * len(infectives)
        if total == 0:
            return {0: 1.0}
        out: Dict[int, float] = {}
        for w, mult in pressure.items():
            weight = beta * mult / total
            nxt = state[:w] + (_I,) + state[w + 1 :]
            for size, prob in law(nxt).items():
                out[size + 1] = out.get(size + 1, 0.0) + weight * prob
        if rho > 0:
            for v in infectives:
                weight = rho / total
                nxt = state[:v] + (_R,) + state[v + 1 :]
                for size, prob in law(nxt).items():
                    out[size] = out.get(size, 0.0) + weight * prob
        return out

    return dict(sorted(law(tuple(int(s) for s in states)).items()))


def exact_configuration_final_size_distribution(config: DegreeConfiguration) -> Dict[int, float]:
    """Exact final-size law on G*(n, (d_i)), averaging over all matchings.

    Raises:
        ValueError: If the total degree exceeds the enumeration limit.
    """
    if config.total_degree > EXACT_MAX_TOTAL_DEGREE:
        raise ValueError(f"exact enumeration limited to total degree {EXACT_MAX_TOTAL_DEGREE}")
    degrees, states = degrees_from_configuration(config)
    graphs: Counter = Counter()
    representative: Dict[tuple, Multigraph] = {}
    for graph in iter_matchings(degrees):
        key = tuple(sorted(tuple(sorted(e)) for e in graph.edges.tolist()))
        graphs[key] += 1
        representative.setdefault(key, graph)
    total = sum(graphs.values())
    out: Dict[int, float] = {}
    for key, count in graphs.items():
        law = exact_final_size_distribution(representative[key], states, config.beta, config.rho)
        for size, prob in law.items():
            out[size] = out.get(size, 0.0) + prob * count / total
    return dict(sorted(out.items()))
