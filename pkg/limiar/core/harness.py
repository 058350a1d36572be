"""
Monte Carlo orchestration.

An :class:`ExperimentSpec` names where the graph comes from (an explicit
degree configuration, a Poisson / G(n, p) / G(n, m) recipe, a per-vertex
degree list or a pinned graph), how the seeds are placed, and which engine
runs the epidemic. :func:`run_experiment` replicates it on a thread pool with
one random stream per replica, classifies each outcome against the predicted
large-outbreak size and aggregates the estimates.

Engines follow a small strategy interface (:class:`EpidemicEngine`) so the
harness does not care whether a replica needs a concrete graph.
"""

from __future__ import annotations

import math
import os
from abc import ABC, abstractmethod
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Sequence, TypeVar

import numpy as np

from ..errors import (
    ConfigError,
    LimiarError,
    NoLargeOutbreaks,
    PreconditionError,
    QuadratureFailure,
    Subcritical,
    TargetUnreachable,
)
from ..log import get_logger
from ..models import (
    DegreeConfiguration,
    EpidemicOutcome,
    Estimate,
    Multigraph,
    OutcomeClass,
    TrajectoryRecord,
    VertexState,
)
from ..rng import StreamPurpose, stream
from .degree_model import (
    CriticalityReport,
    Regime,
    RegimeThresholds,
    alpha_from_moments,
    compute_alpha,
    compute_criticality,
    gnp_corollary,
    moments_from_pmf,
    poisson_pmf,
    predict_final_size,
    predict_small_outbreak_probability,
)
from .graph_gen import (
    StateAssignment,
    assign_initial_states,
    configuration_from_states,
    degrees_from_configuration,
    sample_gnm,
    sample_gnp,
    sample_multigraph,
    sample_poisson_degrees,
    sample_simple_graph,
)
from .sellke import SellkeDraw, seed_degree_prefix, sellke_final_size, sellke_sweep
from .sir_dynamics import (
    infective_limit_deviation,
    limit_grid,
    run_gillespie,
    run_pairing_dynamic,
    run_time_changed,
)

logger = get_logger(__name__)

DEFAULT_EPSILON = 0.5
TARGET_TOLERANCE = 0.1

T = TypeVar("T")


@dataclass(frozen=True)
class PoissonRecipe:
    """i.i.d. Poisson(mean) degrees on ``n`` vertices."""

    n: int
    mean: float

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "poisson", "n": self.n, "mean": self.mean}


@dataclass(frozen=True)
class GnpRecipe:
    n: int
    p: float

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "gnp", "n": self.n, "p": self.p}


@dataclass(frozen=True)
class GnmRecipe:
    n: int
    m: int

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "gnm", "n": self.n, "m": self.m}


@dataclass(frozen=True)
class DegreeSequence:
    """Explicit per-vertex degrees; states come from the seed rule."""

    degrees: tuple[int, ...]

    def to_dict(self) -> Dict[str, Any]:
        hist = Counter(self.degrees)
        return {"kind": "degrees", "counts": {str(k): hist[k] for k in sorted(hist)}}


Source = DegreeConfiguration | PoissonRecipe | GnpRecipe | GnmRecipe | DegreeSequence


@dataclass(frozen=True)
class SeedRule:
    """How many vertices start infective or recovered, and where.

    Ignored for :class:`DegreeConfiguration` sources, which fix the counts by
    degree.

    Attributes:
        n_I: Number of infective vertices.
        n_R: Number of recovered vertices.
        placement: ``UNIFORM_RANDOM`` or ``HIGH_DEGREE``.
        alpha_power: If set, ``n_I = round(alpha_power * n * alpha^1.5)``.
    """

    n_I: int = 1
    n_R: int = 0
    placement: StateAssignment = StateAssignment.UNIFORM_RANDOM
    alpha_power: float | None = None

    def __post_init__(self) -> None:
        if self.n_I < 0 or self.n_R < 0:
            raise ConfigError("seed counts must be non-negative")
        object.__setattr__(self, "placement", StateAssignment(self.placement))
        if self.placement is StateAssignment.BY_DEGREE_SPEC:
            raise ConfigError("by-degree placement needs an explicit configuration")

    def resolve_n_I(self, n: int, alpha: float) -> int:
        if self.alpha_power is None:
            return self.n_I
        if alpha <= 0:
            raise Subcritical("alpha-scaled seeding needs alpha > 0")
        return min(n, int(round(self.alpha_power * n * alpha**1.5)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_I": self.n_I,
            "n_R": self.n_R,
            "placement": StateAssignment(self.placement).value,
            "alpha_power": self.alpha_power,
        }


class EngineKind(str, Enum):
    GILLESPIE = "gillespie"
    PAIRING = "pairing"
    TIME_CHANGED = "time_changed"
    SELLKE = "sellke"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce an experiment.

    ``threads`` only changes how fast the replicas run, never their results,
    so it is left out of :meth:`to_dict`.
    """

    source: Source
    engine: EngineKind = EngineKind.PAIRING
    reps: int = 1
    master_seed: int = 0
    classification_epsilon: float = DEFAULT_EPSILON
    beta: float = 1.0
    rho: float = 1.0
    seeds: SeedRule = field(default_factory=SeedRule)
    pinned_graph: Multigraph | None = None
    quenched: bool = False
    simple: bool = False
    thresholds: RegimeThresholds = field(default_factory=RegimeThresholds)
    grid: tuple[float, ...] = ()
    threads: int = 1

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if not 0 < self.classification_epsilon < 1:
            raise ConfigError("classification_epsilon must lie in (0, 1)")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")
        object.__setattr__(self, "engine", EngineKind(self.engine))
        if isinstance(self.source, DegreeConfiguration):
            object.__setattr__(self, "beta", self.source.beta)
            object.__setattr__(self, "rho", self.source.rho)
        if self.pinned_graph is not None and self.pinned_graph.n != source_size(self.source):
            raise ConfigError("pinned graph and source disagree on the vertex count")

    @property
    def n(self) -> int:
        return source_size(self.source)

    def to_dict(self) -> Dict[str, Any]:
        if isinstance(self.source, DegreeConfiguration):
            source = {"kind": "config", **self.source.to_dict()}
        else:
            source = self.source.to_dict()
        return {
            "source": source,
            "engine": self.engine.value,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "classification_epsilon": self.classification_epsilon,
            "beta": self.beta,
            "rho": self.rho,
            "seeds": self.seeds.to_dict(),
            "pinned_graph": None
            if self.pinned_graph is None
            else {"n": self.pinned_graph.n, "m": self.pinned_graph.m},
            "quenched": self.quenched,
            "simple": self.simple,
            "thresholds": {
                "nu_zero_below": self.thresholds.nu_zero_below,
                "nu_infinite_above": self.thresholds.nu_infinite_above,
            },
            "grid": list(self.grid),
        }


def source_size(source: Source) -> int:
    if isinstance(source, DegreeConfiguration):
        return source.n
    if isinstance(source, DegreeSequence):
        return len(source.degrees)
    return source.n


def reference_law(spec: ExperimentSpec) -> tuple[float, float]:
    """Epidemic alpha and mean degree of the source with everyone susceptible.

    Used to size seed sets before any graph is drawn.
    """
    src = spec.source
    if spec.pinned_graph is not None:
        counts = Counter(spec.pinned_graph.degrees.tolist())
    elif isinstance(src, DegreeConfiguration):
        counts = Counter(src.n_by_degree)
    elif isinstance(src, DegreeSequence):
        counts = Counter(src.degrees)
    else:
        if isinstance(src, PoissonRecipe):
            mean = src.mean
        elif isinstance(src, GnpRecipe):
            mean = src.p * (src.n - 1)
        else:
            mean = 2.0 * src.m / src.n
        m = moments_from_pmf(poisson_pmf(mean))
        return alpha_from_moments(m, spec.beta, spec.rho), m.lam
    total = sum(counts.values())
    m = moments_from_pmf({k: c / total for k, c in counts.items()})
    return alpha_from_moments(m, spec.beta, spec.rho), m.lam


@dataclass(frozen=True)
class Realisation:
    """The configuration of one replica and, for graph engines, its graph."""

    config: DegreeConfiguration
    graph: Multigraph | None = None
    states: np.ndarray | None = None


def _graph_from_degrees(degrees: np.ndarray, simple: bool, rng: np.random.Generator) -> Multigraph:
    if simple:
        return sample_simple_graph(degrees, rng)
    return sample_multigraph(degrees, rng)


def build_graph(spec: ExperimentSpec, rng: np.random.Generator) -> Multigraph:
    """A fresh graph drawn from the experiment's source."""
    src = spec.source
    if isinstance(src, GnpRecipe):
        return sample_gnp(src.n, src.p, rng)
    if isinstance(src, GnmRecipe):
        return sample_gnm(src.n, src.m, rng)
    if isinstance(src, PoissonRecipe):
        degrees = sample_poisson_degrees(src.n, src.mean, rng)
    elif isinstance(src, DegreeSequence):
        degrees = np.asarray(src.degrees, dtype=np.int64)
    else:
        degrees, _ = degrees_from_configuration(src)
    return _graph_from_degrees(degrees, spec.simple, rng)


def _assign_states(spec: ExperimentSpec, degrees: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    src = spec.source
    if isinstance(src, DegreeConfiguration):
        return assign_initial_states(degrees, 0, 0, StateAssignment.BY_DEGREE_SPEC, src, rng)
    n_I = spec.seeds.n_I
    if spec.seeds.alpha_power is not None:
        n_I = spec.seeds.resolve_n_I(degrees.size, reference_law(spec)[0])
    return assign_initial_states(degrees, n_I, spec.seeds.n_R, spec.seeds.placement, None, rng)


def realise(
    spec: ExperimentSpec,
    rng: np.random.Generator,
    need_graph: bool,
    shared_graph: Multigraph | None = None,
) -> Realisation:
    """Draw the configuration (and graph, if needed) of one replica.

    Engines that build the graph lazily only get a configuration; for those
    a degree-only source never materialises a graph.
    """
    src = spec.source
    graph = spec.pinned_graph or shared_graph
    if graph is None and (need_graph or isinstance(src, (GnpRecipe, GnmRecipe))):
        graph = build_graph(spec, rng)
    if graph is not None:
        states = _assign_states(spec, graph.degrees, rng)
        config = configuration_from_states(graph.degrees, states, spec.beta, spec.rho)
        if not need_graph:
            return Realisation(config)
        return Realisation(config, graph, states)
    if isinstance(src, DegreeConfiguration):
        return Realisation(src)
    if isinstance(src, PoissonRecipe):
        degrees = sample_poisson_degrees(src.n, src.mean, rng)
    else:
        degrees = np.asarray(src.degrees, dtype=np.int64)
    states = _assign_states(spec, degrees, rng)
    return Realisation(configuration_from_states(degrees, states, spec.beta, spec.rho))


class EpidemicEngine(ABC):
    """Strategy interface: run one epidemic on one realisation.

    Attributes:
        needs_graph: Whether :meth:`run` reads ``realisation.graph`` and
            ``realisation.states``; otherwise only the configuration is used.
    """

    needs_graph: bool = False

    @abstractmethod
    def run(self, realisation: Realisation, rng: np.random.Generator) -> EpidemicOutcome:
        """Run the epidemic to extinction and return its outcome."""


class GillespieEngine(EpidemicEngine):
    """Continuous-time simulation on the realised graph."""

    needs_graph = True

    def run(self, realisation: Realisation, rng: np.random.Generator) -> EpidemicOutcome:
        c = realisation.config
        return run_gillespie(realisation.graph, realisation.states, c.beta, c.rho, rng)


class PairingEngine(EpidemicEngine):
    """Red/black lazy pairing; never builds a graph."""

    def run(self, realisation: Realisation, rng: np.random.Generator) -> EpidemicOutcome:
        return run_pairing_dynamic(realisation.config, rng)


class TimeChangedEngine(EpidemicEngine):
    """Time-changed lazy pairing, recorded on ``grid`` in time-changed units."""

    def __init__(self, grid: Sequence[float] = ()) -> None:
        self.grid = tuple(grid)

    def run(self, realisation: Realisation, rng: np.random.Generator) -> EpidemicOutcome:
        outcome, _ = run_time_changed(realisation.config, rng, self.grid)
        return outcome


class SellkeEngine(EpidemicEngine):
    """Sellke final size with the initial infectives as seeds."""

    needs_graph = True

    def run(self, realisation: Realisation, rng: np.random.Generator) -> EpidemicOutcome:
        graph, states, c = realisation.graph, realisation.states, realisation.config
        seeds = np.flatnonzero(states == VertexState.INFECTIVE)
        if seeds.size == 0:
            return EpidemicOutcome(0, {}, n_initial_infective=0)
        draw = SellkeDraw.sample(graph.n, c.rho, rng).with_seeds_first(seeds)
        immune = states == VertexState.RECOVERED
        new, infected = sellke_final_size(graph, draw, seeds.size, c.beta, immune=immune)
        fresh = infected[states[infected] == VertexState.SUSCEPTIBLE]
        hist = np.bincount(graph.degrees[fresh]) if fresh.size else np.zeros(0, np.int64)
        nz = np.flatnonzero(hist)
        return EpidemicOutcome(
            final_size=new,
            final_size_by_degree=dict(zip(nz.tolist(), hist[nz].tolist())),
            n_initial_infective=int(seeds.size),
        )


def make_engine(kind: EngineKind, grid: Sequence[float] = ()) -> EpidemicEngine:
    """Engine for ``kind``; ``grid`` only matters to the time-changed engine."""
    kind = EngineKind(kind)
    if kind is EngineKind.GILLESPIE:
        return GillespieEngine()
    if kind is EngineKind.PAIRING:
        return PairingEngine()
    if kind is EngineKind.TIME_CHANGED:
        return TimeChangedEngine(grid)
    return SellkeEngine()


REPLICA_HEADER = (
    "replica",
    "final_size",
    "classification",
    "regime",
    "predicted_size",
    "ratio",
    "ratio_kind",
    "x_I0",
    "alpha",
    "pairing_events",
    "duration",
)


@dataclass(frozen=True)
class ReplicaRecord:
    """One classified replica with the predictions it was judged against.

    Replicas whose configuration admits no prediction (for instance a
    subcritical one) have ``regime`` set to ``None``, NaN predictions and are
    classified Small.
    """

    index: int
    outcome: EpidemicOutcome
    regime: str | None
    predicted_size: float
    ratio: float
    ratio_kind: str
    x_I0: int
    alpha: float
    susceptible: Dict[int, int]
    p_small: float | None = None
    p_small_corrected: float | None = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "replica": self.index,
            "final_size": self.outcome.final_size,
            "classification": self.outcome.classification.value,
            "regime": self.regime,
            "predicted_size": self.predicted_size,
            "ratio": self.ratio,
            "ratio_kind": self.ratio_kind,
            "x_I0": self.x_I0,
            "alpha": self.alpha,
            "pairing_events": self.outcome.pairing_events,
            "duration": self.outcome.duration,
        }


def _ratio(report: CriticalityReport, config: DegreeConfiguration, z: int) -> tuple[float, str]:
    if report.regime is Regime.NU_INFINITE:
        return z / math.sqrt(config.n_S * config.x_I0), "sqrt"
    return z / (config.n_S * report.alpha_bar), "alpha"


def _small_outbreak_predictions(
    report: CriticalityReport, config: DegreeConfiguration
) -> tuple[float | None, float | None]:
    if report.regime is not Regime.NU_ZERO:
        return None, None
    plain = predict_small_outbreak_probability(report, config)
    try:
        corrected = predict_small_outbreak_probability(report, config, corrected=True)
    except QuadratureFailure as exc:
        logger.warning("corrected small-outbreak probability unavailable: %s", exc)
        corrected = None
    return plain, corrected


def run_replica(
    spec: ExperimentSpec,
    index: int,
    engine: EpidemicEngine,
    shared_graph: Multigraph | None = None,
) -> ReplicaRecord:
    """Run and classify replica ``index`` on its own random stream."""
    rng = stream(spec.master_seed, StreamPurpose.REPLICA, index)
    realisation = realise(spec, rng, engine.needs_graph, shared_graph)
    config = realisation.config
    try:
        report = compute_criticality(config, spec.thresholds)
    except PreconditionError as exc:
        logger.debug("replica %d has no prediction: %s", index, exc)
        report = None
    outcome = engine.run(realisation, rng)

    if report is None:
        outcome = replace(outcome, classification=OutcomeClass.SMALL)
        return ReplicaRecord(
            index=index,
            outcome=outcome,
            regime=None,
            predicted_size=math.nan,
            ratio=math.nan,
            ratio_kind="none",
            x_I0=config.x_I0,
            alpha=compute_alpha(config) if config.n_S else math.nan,
            susceptible=dict(config.n_S_by_degree),
        )

    predicted, _ = predict_final_size(report, config)
    large = outcome.final_size > spec.classification_epsilon * predicted
    outcome = replace(outcome, classification=OutcomeClass.LARGE if large else OutcomeClass.SMALL)
    ratio, kind = _ratio(report, config, outcome.final_size)
    p_small, p_corrected = _small_outbreak_predictions(report, config)
    logger.debug(
        "replica %d: Z = %d (%s), predicted %.6g",
        index,
        outcome.final_size,
        outcome.classification.value,
        predicted,
    )
    return ReplicaRecord(
        index=index,
        outcome=outcome,
        regime=report.regime.value,
        predicted_size=predicted,
        ratio=ratio,
        ratio_kind=kind,
        x_I0=config.x_I0,
        alpha=report.alpha,
        susceptible=dict(config.n_S_by_degree),
        p_small=p_small,
        p_small_corrected=p_corrected,
    )


def _worker_count(threads: int) -> int:
    return threads if threads > 0 else (os.cpu_count() or 1)


def _ordered_map(fn: Callable[[int], T], count: int, threads: int) -> List[T]:
    """``[fn(0), ..., fn(count - 1)]``, in index order whatever the pool size."""
    workers = min(_worker_count(threads), count)
    if workers <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _mean_or_none(values: Sequence[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


@dataclass(frozen=True)
class AggregateResult:
    """Aggregated replicas of one experiment.

    Attributes:
        spec: The experiment that produced this result.
        replicas: Successful replicas in index order.
        failures: ``(replica_index, message)`` of replicas that raised.
        p_large: Fraction of Large outcomes with binomial standard error.
        large_mean_ratio: Mean of ``Z / (n_S alpha_bar)`` (kind ``"alpha"``)
            or ``Z / sqrt(n_S X_I0)`` (kind ``"sqrt"``) over Large outcomes.
        ratio_kind: Which ratio ``large_mean_ratio`` averages.
        degree_profile_tv: TV distance of the pooled large-outbreak degree
            profile to the size-biased law; ``None`` without Large outcomes.
        pooled_susceptible: Susceptible degree counts summed over replicas.
        mean_p_small: Mean predicted small-outbreak probability.
        mean_p_small_corrected: Same with the per-vertex correction.
    """

    spec: ExperimentSpec
    replicas: List[ReplicaRecord]
    failures: List[tuple[int, str]]
    p_large: Estimate
    large_mean_ratio: Estimate
    ratio_kind: str
    degree_profile_tv: float | None
    pooled_susceptible: Dict[int, int]
    mean_p_small: float | None
    mean_p_small_corrected: float | None

    @property
    def outcomes(self) -> List[EpidemicOutcome]:
        return [r.outcome for r in self.replicas]

    def header(self) -> List[str]:
        return list(REPLICA_HEADER)

    def rows(self) -> List[List[Any]]:
        return [list(r.to_dict().values()) for r in self.replicas]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spec": self.spec.to_dict(),
            "master_seed": self.spec.master_seed,
            "reps": self.spec.reps,
            "completed": len(self.replicas),
            "failures": [{"replica": i, "message": m} for i, m in self.failures],
            "p_large": self.p_large.to_dict(),
            "large_mean_ratio": self.large_mean_ratio.to_dict(),
            "ratio_kind": self.ratio_kind,
            "degree_profile_tv": self.degree_profile_tv,
            "mean_p_small": self.mean_p_small,
            "mean_p_small_corrected": self.mean_p_small_corrected,
            "replicas": [r.to_dict() for r in self.replicas],
        }


def p_large_estimate(large: int, total: int) -> Estimate:
    """Binomial proportion with standard error ``sqrt(p (1 - p) / total)``."""
    if total == 0:
        return Estimate(math.nan, math.nan, 0)
    p = large / total
    return Estimate(p, math.sqrt(p * (1.0 - p) / total), total)


def degree_profile_check(
    outcomes: Sequence[EpidemicOutcome],
    susceptible: DegreeConfiguration | Mapping[int, int],
) -> float:
    """TV distance between pooled ``Z_k / Z`` over Large outcomes and ``k p_k / lambda``.

    Raises:
        NoLargeOutbreaks: If no outcome is classified Large.
    """
    counts = susceptible.n_S_by_degree if isinstance(susceptible, DegreeConfiguration) else susceptible
    pooled: Counter = Counter()
    large = 0
    for o in outcomes:
        if o.classification is OutcomeClass.LARGE:
            large += 1
            pooled.update(o.final_size_by_degree)
    if large == 0:
        raise NoLargeOutbreaks("no Large outcome to pool")
    total_z = sum(pooled.values())
    weights = {k: k * c for k, c in counts.items() if k > 0}
    total_w = sum(weights.values())
    if total_z == 0 or total_w == 0:
        raise NoLargeOutbreaks("pooled large outbreaks infected nobody")
    keys = set(pooled) | set(weights)
    return 0.5 * sum(abs(pooled.get(k, 0) / total_z - weights.get(k, 0) / total_w) for k in keys)


def run_experiment(spec: ExperimentSpec) -> AggregateResult:
    """Run ``spec.reps`` replicas and aggregate them in replica order.

    A replica that raises a :class:`LimiarError` is recorded as a failure and
    left out of the estimates.
    """
    engine = make_engine(spec.engine, spec.grid)
    shared = None
    if spec.quenched and spec.pinned_graph is None:
        shared = build_graph(spec, stream(spec.master_seed, StreamPurpose.REALISATION, 0))
    logger.info(
        "experiment: engine=%s reps=%d seed=%d", spec.engine.value, spec.reps, spec.master_seed
    )

    def one(index: int) -> ReplicaRecord | tuple[int, str]:
        try:
            return run_replica(spec, index, engine, shared)
        except LimiarError as exc:
            logger.warning("replica %d failed: %s", index, exc)
            return index, f"{type(exc).__name__}: {exc}"

    results = _ordered_map(one, spec.reps, spec.threads)
    replicas = [r for r in results if isinstance(r, ReplicaRecord)]
    failures = [r for r in results if not isinstance(r, ReplicaRecord)]

    large = [r for r in replicas if r.outcome.classification is OutcomeClass.LARGE]
    kinds = Counter(r.ratio_kind for r in large)
    kind = "sqrt" if kinds["sqrt"] > kinds["alpha"] else "alpha"
    pooled: Counter = Counter()
    for r in replicas:
        pooled.update(r.susceptible)
    tv = None
    if large:
        tv = degree_profile_check([r.outcome for r in large], pooled)

    result = AggregateResult(
        spec=spec,
        replicas=replicas,
        failures=failures,
        p_large=p_large_estimate(len(large), len(replicas)),
        large_mean_ratio=Estimate.from_samples([r.ratio for r in large if r.ratio_kind == kind]),
        ratio_kind=kind,
        degree_profile_tv=tv,
        pooled_susceptible=dict(sorted(pooled.items())),
        mean_p_small=_mean_or_none([r.p_small for r in replicas]),
        mean_p_small_corrected=_mean_or_none([r.p_small_corrected for r in replicas]),
    )
    logger.info(
        "experiment done: %d/%d replicas, p_large = %.4g",
        len(replicas),
        spec.reps,
        result.p_large.mean,
    )
    return result


@dataclass(frozen=True)
class SurvivalPoint:
    """Empirical small-outbreak probability at one target ``alpha X_I0``."""

    target: float
    seeds: int
    seed_degree: int | None
    achieved: float
    p_small: Estimate
    predicted: float | None
    predicted_corrected: float | None
    predicted_gnp: float | None = None

    HEADER = (
        "target",
        "seeds",
        "seed_degree",
        "achieved",
        "p_small",
        "stderr",
        "predicted",
        "predicted_corrected",
        "predicted_gnp",
    )

    def row(self) -> List[Any]:
        return [
            self.target,
            self.seeds,
            self.seed_degree,
            self.achieved,
            self.p_small.mean,
            self.p_small.stderr,
            self.predicted,
            self.predicted_corrected,
            self.predicted_gnp,
        ]

    def to_dict(self) -> Dict[str, Any]:
        return dict(zip(self.HEADER, self.row()))


def _single_seed_config(config: DegreeConfiguration, target: float) -> tuple[DegreeConfiguration, int]:
    """``config`` with its infectives replaced by one vertex of degree ``k``.

    ``k`` keeps the total degree even and brings ``alpha k`` closest to the
    target, with alpha recomputed for each candidate since the seed's
    half-edges enter it.
    """
    others = config.x_S0 + config.x_R0
    n_S = config.n_S
    if n_S == 0:
        raise Subcritical("no susceptible vertices")
    s2 = sum(j * (j - 1) * c for j, c in config.n_S_by_degree.items()) / n_S
    candidates = []
    for k in range(2 - others % 2, 2 * others + 4, 2):
        alpha = s2 - (1.0 + config.rho / config.beta) * (others + k) / n_S
        if alpha <= 0:
            break
        candidates.append((abs(k * alpha - target), k))
        if k * alpha > 2 * target:
            break
    if not candidates:
        raise TargetUnreachable(f"no single seed reaches alpha X_I0 = {target}")
    err, k = min(candidates)
    if err > TARGET_TOLERANCE * target:
        raise TargetUnreachable(f"closest single seed misses alpha X_I0 = {target} by {err:.3g}")
    seeded = DegreeConfiguration(
        config.n_S_by_degree, {k: 1}, config.n_R_by_degree, config.beta, config.rho
    )
    return seeded, k


def survival_curve(spec: ExperimentSpec, x_values: Sequence[float]) -> List[SurvivalPoint]:
    """Empirical versus predicted small-outbreak probability for each ``alpha X_I0`` target.

    With uniform placement the number of seeds is ``round(x / (alpha mean_degree))``.
    With ``HIGH_DEGREE`` placement on an explicit configuration the infectives
    are replaced by a single vertex whose degree puts ``alpha X_I0`` closest
    to the target.

    Raises:
        TargetUnreachable: If the closest choice misses a target by more than 10%.
    """
    placement = StateAssignment(spec.seeds.placement)
    single = placement is StateAssignment.HIGH_DEGREE
    if single and not isinstance(spec.source, DegreeConfiguration):
        raise ConfigError("single high-degree seeding needs an explicit configuration")
    if not single and isinstance(spec.source, DegreeConfiguration):
        raise ConfigError("uniform seeding needs a degree recipe or degree list source")
    alpha0, mean_degree = reference_law(spec)
    if alpha0 <= 0:
        raise Subcritical(f"alpha = {alpha0:.6g} is not positive")

    points: List[SurvivalPoint] = []
    for x in x_values:
        if x <= 0:
            raise TargetUnreachable("targets must be positive")
        seed_degree = None
        if single:
            config, seed_degree = _single_seed_config(spec.source, x)
            point_spec = replace(spec, source=config)
            n_I = 1
        else:
            n_I = int(round(x / (alpha0 * mean_degree)))
            if n_I == 0 or abs(n_I * alpha0 * mean_degree - x) > TARGET_TOLERANCE * x:
                raise TargetUnreachable(f"no seed count reaches alpha X_I0 = {x}")
            point_spec = replace(spec, seeds=replace(spec.seeds, n_I=n_I, alpha_power=None))
        result = run_experiment(point_spec)
        achieved = float(np.mean([r.alpha * r.x_I0 for r in result.replicas])) if result.replicas else math.nan
        p_large = result.p_large
        predicted_gnp = None
        if isinstance(spec.source, (GnpRecipe, GnmRecipe)):
            src = spec.source
            p = src.p if isinstance(src, GnpRecipe) else 2.0 * src.m / (src.n * (src.n - 1))
            predicted_gnp = gnp_corollary(src.n, p, spec.beta, spec.rho, n_I, spec.thresholds).p_small
        points.append(
            SurvivalPoint(
                target=float(x),
                seeds=n_I,
                seed_degree=seed_degree,
                achieved=achieved,
                p_small=Estimate(1.0 - p_large.mean, p_large.stderr, p_large.count),
                predicted=result.mean_p_small,
                predicted_corrected=result.mean_p_small_corrected,
                predicted_gnp=predicted_gnp,
            )
        )
        logger.info("survival target %.4g: p_small = %.4g", x, 1.0 - p_large.mean)
    return points


SCATTER_HEADER = ("realisation_id", "m", "X_I0", "Z")


def figure_fs_scatter(
    spec: ExperimentSpec, realisations: int, m_grid: Sequence[int]
) -> List[tuple[int, int, int, int]]:
    """``(realisation_id, m, X_I0, Z)`` rows, one Sellke draw per realisation.

    ``Z`` counts every eventually infected vertex, seeds included.

    Raises:
        ConfigError: If the engine is not Sellke, ``realisations < 1``, or
            ``m_grid`` is empty or has a seed count outside ``[1, n]``.
    """
    if spec.engine is not EngineKind.SELLKE:
        raise ConfigError("figure scatter needs the sellke engine")
    if realisations < 1:
        raise ConfigError("realisations must be at least 1")
    ms = sorted(set(int(m) for m in m_grid))
    if not ms:
        raise ConfigError("m_grid must not be empty")
    if ms[0] < 1 or ms[-1] > spec.n:
        raise ConfigError(f"m_grid values must lie in [1, {spec.n}], got {ms[0]}..{ms[-1]}")

    def one(r: int) -> List[tuple[int, int, int, int]]:
        rng = stream(spec.master_seed, StreamPurpose.REALISATION, r)
        graph = spec.pinned_graph or build_graph(spec, rng)
        draw = SellkeDraw.sample(graph.n, spec.rho, rng)
        prefix = seed_degree_prefix(graph, draw)
        return [(r, m, int(prefix[m]), z) for m, z in sellke_sweep(graph, draw, ms, spec.beta)]

    rows: List[tuple[int, int, int, int]] = []
    for chunk in _ordered_map(one, realisations, spec.threads):
        rows.extend(chunk)
    return rows


@dataclass(frozen=True)
class TrajectoryRun:
    outcome: EpidemicOutcome
    record: TrajectoryRecord
    report: CriticalityReport
    n: int
    deviation_f_I: float
    deviation_f: float


def trajectories(
    spec: ExperimentSpec,
    grid: Sequence[float] | None = None,
    scaled: bool = True,
    points: int = 41,
    replica: int = 0,
) -> TrajectoryRun:
    """Time-changed run of one replica recorded on a grid.

    Args:
        spec: Experiment; only the source, rates and seeds are used.
        grid: Times; ``None`` means ``points`` rescaled times on ``[0, 2 xi]``.
        scaled: If true, ``grid`` is in rescaled time and multiplied by alpha_bar.
        points: Grid size when ``grid`` is ``None``.
        replica: Replica index selecting the random stream.
    """
    rng = stream(spec.master_seed, StreamPurpose.REPLICA, replica)
    config = realise(spec, rng, need_graph=False).config
    report = compute_criticality(config, spec.thresholds)
    if grid is None:
        _, times = limit_grid(report, points)
    else:
        times = np.asarray(grid, dtype=float) * (report.alpha_bar if scaled else 1.0)
    outcome, record = run_time_changed(config, rng, times.tolist())
    dev_f_I, dev_f = infective_limit_deviation(record, report, config.n, outcome.duration)
    return TrajectoryRun(outcome, record, report, config.n, dev_f_I, dev_f)
