"""Data models for limiar.

This module defines the records that travel between the simulation modules,
the harness and the exporters:

- ``DegreeConfiguration``: per-degree susceptible/infective/recovered counts
  plus the infection and recovery rates -- the full input of the model.
- ``VertexState``: the S/I/R state of a single vertex.
- ``Multigraph``: an immutable configuration-model (multi)graph with O(1)
  vertex/half-edge lookups.
- ``EpidemicOutcome`` and ``TrajectoryRecord``: what an epidemic engine
  returns.
- ``ComponentSummary``: connected-component statistics of a graph.
- ``Estimate``, ``Diagnostic`` and ``PredictionReport``: small report records.
- ``RunConfig``: the parsed config document shared by every subcommand.

Records that are written to disk provide ``to_dict`` (and, where they are also
read back, ``from_dict``) producing JSON-serializable dictionaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property
from typing import Any, Dict, List, Mapping, Sequence

import numpy as np

from .errors import ConfigError


def _clean_counts(counts: Mapping[Any, Any], label: str) -> Dict[int, int]:
    """Normalise a degree->count mapping to ``{int: int}`` without zeros."""
    if not isinstance(counts, Mapping):
        raise ConfigError(f"{label} must map degrees to counts")
    cleaned: Dict[int, int] = {}
    for key, value in counts.items():
        try:
            degree = int(key)
            count = int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{label} entry {key!r}: {value!r} is not numeric") from exc
        if count != value:
            raise ConfigError(f"{label} count for degree {degree} is not an integer")
        if degree < 0:
            raise ConfigError(f"{label} has a negative degree {degree}")
        if count < 0:
            raise ConfigError(f"{label} count for degree {degree} is negative")
        if count:
            cleaned[degree] = cleaned.get(degree, 0) + count
    return dict(sorted(cleaned.items()))


def _counts_to_json(counts: Mapping[int, int]) -> Dict[str, int]:
    return {str(k): int(v) for k, v in sorted(counts.items())}


class VertexState(IntEnum):
    """Epidemic state of a vertex."""

    SUSCEPTIBLE = 0
    INFECTIVE = 1
    RECOVERED = 2


@dataclass(frozen=True)
class DegreeConfiguration:
    """Per-degree vertex counts by state, plus the epidemic rates.

    Attributes:
        n_S_by_degree: Number of susceptible vertices of each degree.
        n_I_by_degree: Number of initially infective vertices of each degree.
        n_R_by_degree: Number of initially recovered vertices of each degree.
        beta: Per-edge infection rate (> 0).
        rho: Recovery rate (>= 0).
    """

    n_S_by_degree: Dict[int, int]
    n_I_by_degree: Dict[int, int] = field(default_factory=dict)
    n_R_by_degree: Dict[int, int] = field(default_factory=dict)
    beta: float = 1.0
    rho: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_S_by_degree", _clean_counts(self.n_S_by_degree, "S"))
        object.__setattr__(self, "n_I_by_degree", _clean_counts(self.n_I_by_degree, "I"))
        object.__setattr__(self, "n_R_by_degree", _clean_counts(self.n_R_by_degree, "R"))
        if not (self.beta > 0) or math.isinf(self.beta):
            raise ConfigError("beta must be a finite rate > 0")
        if not (self.rho >= 0) or math.isinf(self.rho):
            raise ConfigError("rho must be a finite rate >= 0")
        if self.n < 1:
            raise ConfigError("a configuration needs at least one vertex")
        if self.total_degree % 2:
            raise ConfigError(f"total degree {self.total_degree} is odd")

    @property
    def n_by_degree(self) -> Dict[int, int]:
        """Counts of all vertices (any state) by degree."""
        merged: Dict[int, int] = {}
        for counts in (self.n_S_by_degree, self.n_I_by_degree, self.n_R_by_degree):
            for k, c in counts.items():
                merged[k] = merged.get(k, 0) + c
        return dict(sorted(merged.items()))

    @property
    def n_S(self) -> int:
        return sum(self.n_S_by_degree.values())

    @property
    def n_I(self) -> int:
        return sum(self.n_I_by_degree.values())

    @property
    def n_R(self) -> int:
        return sum(self.n_R_by_degree.values())

    @property
    def n(self) -> int:
        return self.n_S + self.n_I + self.n_R

    @property
    def total_degree(self) -> int:
        """Sum of k * n_k over all vertices."""
        return sum(k * c for k, c in self.n_by_degree.items())

    @property
    def x_S0(self) -> int:
        """Initial number of susceptible half-edges."""
        return sum(k * c for k, c in self.n_S_by_degree.items())

    @property
    def x_I0(self) -> int:
        """Initial number of infective half-edges, X_{I,0}."""
        return sum(k * c for k, c in self.n_I_by_degree.items())

    @property
    def x_R0(self) -> int:
        """Initial number of recovered half-edges."""
        return sum(k * c for k, c in self.n_R_by_degree.items())

    @property
    def d_I_max(self) -> int:
        return max(self.n_I_by_degree, default=0)

    @property
    def d_S_max(self) -> int:
        return max(self.n_S_by_degree, default=0)

    def to_dict(self) -> Dict[str, Any]:
        """Serialize to a JSON-friendly dictionary (degree keys as strings)."""
        return {
            "S": _counts_to_json(self.n_S_by_degree),
            "I": _counts_to_json(self.n_I_by_degree),
            "R": _counts_to_json(self.n_R_by_degree),
            "beta": float(self.beta),
            "rho": float(self.rho),
        }

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "DegreeConfiguration":
        """Rebuild a configuration produced by :meth:`to_dict`."""
        try:
            return DegreeConfiguration(
                n_S_by_degree=d.get("S", {}),
                n_I_by_degree=d.get("I", {}),
                n_R_by_degree=d.get("R", {}),
                beta=float(d["beta"]),
                rho=float(d["rho"]),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"invalid degree configuration: {exc}") from exc


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Immutable multigraph with loops and multi-edges allowed.

    Attributes:
        n: Number of vertices.
        degrees: Degree of every vertex (a loop adds 2 to its vertex).
        edges: ``(m, 2)`` array of endpoint pairs in construction order.
        half_edge_offsets: ``n + 1`` prefix sums of ``degrees``; the half-edges
            of vertex ``v`` are ``offsets[v]:offsets[v + 1]`` in CSR order.
    """

    n: int
    degrees: np.ndarray
    edges: np.ndarray
    half_edge_offsets: np.ndarray

    def __post_init__(self) -> None:
        for name in ("degrees", "edges", "half_edge_offsets"):
            arr = np.array(getattr(self, name), dtype=np.int64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.edges.size == 0:
            object.__setattr__(self, "edges", np.zeros((0, 2), dtype=np.int64))

    @classmethod
    def from_edges(cls, n: int, edges: np.ndarray | Sequence[Sequence[int]]) -> "Multigraph":
        """Build a graph from an edge list, deriving degrees and offsets."""
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        degrees = np.bincount(e.ravel(), minlength=n).astype(np.int64)
        offsets = np.concatenate(([0], np.cumsum(degrees)))
        return cls(n=int(n), degrees=degrees, edges=e, half_edge_offsets=offsets)

    @property
    def m(self) -> int:
        """Number of edges, counting multiplicity."""
        return int(self.edges.shape[0])

    @cached_property
    def _csr(self) -> tuple[np.ndarray, np.ndarray]:
        m = self.m
        src = np.concatenate((self.edges[:, 0], self.edges[:, 1]))
        dst = np.concatenate((self.edges[:, 1], self.edges[:, 0]))
        order = np.argsort(src, kind="stable")
        neighbors = dst[order]
        csr_pos = np.empty(2 * m, dtype=np.int64)
        csr_pos[order] = np.arange(2 * m)
        partner = csr_pos[(order + m) % max(2 * m, 1)] if m else np.zeros(0, np.int64)
        neighbors.setflags(write=False)
        partner.setflags(write=False)
        return neighbors, partner

    @property
    def neighbors(self) -> np.ndarray:
        """Neighbour of each half-edge in CSR order (loops list the vertex twice)."""
        return self._csr[0]

    @property
    def partner(self) -> np.ndarray:
        """CSR index of the half-edge each half-edge is paired with."""
        return self._csr[1]

    @cached_property
    def owner(self) -> np.ndarray:
        """Vertex owning each half-edge in CSR order."""
        owner = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        owner.setflags(write=False)
        return owner

    @cached_property
    def as_lists(self) -> tuple[List[int], List[int], List[int], List[int]]:
        """``(offsets, neighbors, partner, owner)`` as Python lists for hot loops."""
        return (
            self.half_edge_offsets.tolist(),
            self.neighbors.tolist(),
            self.partner.tolist(),
            self.owner.tolist(),
        )


class OutcomeClass(str, Enum):
    SMALL = "small"
    LARGE = "large"


@dataclass(frozen=True)
class EpidemicOutcome:
    """Result of one epidemic run.

    Attributes:
        final_size: Initially susceptible vertices ever infected.
        final_size_by_degree: ``final_size`` split by vertex degree.
        duration: Model time until the epidemic ended, on ``time_scale``.
            ``None`` for the untimed pairing jump chain.
        time_scale: ``"original"``, ``"time_changed"`` or ``None``.
        pairing_events: Number of half-edge pairings (or infection attempts
            along edges for the fixed-graph engine).
        z0_red: Initial number of red free half-edges (pairing engine only).
        last_infection_time: Time of the last S->I transition, if any.
        z_walk: Red free half-edge counts sampled at requested pairing steps.
        n_initial_infective: Number of seeds.
        classification: Filled in by the harness.
    """

    final_size: int
    final_size_by_degree: Dict[int, int]
    duration: float | None = None
    time_scale: str | None = None
    pairing_events: int = 0
    z0_red: int | None = None
    last_infection_time: float | None = None
    z_walk: tuple[int, ...] | None = None
    n_initial_infective: int = 0
    classification: OutcomeClass | None = None

    def __post_init__(self) -> None:
        if sum(self.final_size_by_degree.values()) != self.final_size:
            raise ValueError("final_size must equal the sum over degrees")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "final_size": self.final_size,
            "final_size_by_degree": _counts_to_json(self.final_size_by_degree),
            "duration": self.duration,
            "time_scale": self.time_scale,
            "pairing_events": self.pairing_events,
            "z0_red": self.z0_red,
            "last_infection_time": self.last_infection_time,
            "n_initial_infective": self.n_initial_infective,
            "classification": None if self.classification is None else self.classification.value,
        }


@dataclass(frozen=True)
class TrajectoryRecord:
    """Counts sampled on a time grid next to their deterministic limits.

    The ``f_*`` lists hold ``None`` where no deterministic value is defined
    (configurations with initially recovered vertices).
    """

    grid: tuple[float, ...]
    S_k: tuple[Dict[int, int], ...]
    X_S: tuple[int, ...]
    X_I: tuple[int, ...]
    X_R: tuple[int, ...]
    f_S: tuple[float | None, ...]
    f_I: tuple[float | None, ...]
    f_R: tuple[float | None, ...]

    def degrees_present(self) -> List[int]:
        keys = set()
        for snapshot in self.S_k:
            keys.update(snapshot)
        return sorted(keys)

    def header(self) -> List[str]:
        return ["t", "X_S", "X_I", "X_R", "f_S", "f_I", "f_R"] + [
            f"S_{k}" for k in self.degrees_present()
        ]

    def rows(self) -> List[List[Any]]:
        """One row per grid point, matching :meth:`header`."""
        degrees = self.degrees_present()
        out = []
        for i, t in enumerate(self.grid):
            row: List[Any] = [
                t,
                self.X_S[i],
                self.X_I[i],
                self.X_R[i],
                self.f_S[i],
                self.f_I[i],
                self.f_R[i],
            ]
            row.extend(self.S_k[i].get(k, 0) for k in degrees)
            out.append(row)
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {name: [row[i] for row in self.rows()] for i, name in enumerate(self.header())}


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    count: int = 0

    @classmethod
    def from_samples(cls, values: Sequence[float]) -> "Estimate":
        arr = np.asarray(values, dtype=float)
        if arr.size == 0:
            return cls(math.nan, math.nan, 0)
        if arr.size == 1:
            return cls(float(arr[0]), 0.0, 1)
        return cls(float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size)), int(arr.size))

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean, "stderr": self.stderr}


@dataclass(frozen=True)
class ComponentSummary:
    """Connected components of a graph, largest first.

    Attributes:
        sizes: Component vertex counts, descending.
        c1_vertices: Vertices in the largest component.
        c2_vertices: Vertices in the second largest component (0 if none).
        c1_edges: Edges inside the largest component (loops once, parallel
            edges by multiplicity).
        c2_edges: Edges inside the second largest component.
        c1_degree_profile: Degree histogram of the largest component.
        edge_counts: Edge counts per component, aligned with ``sizes``.
        labels: Component index (into ``sizes``) of every vertex.
    """

    sizes: tuple[int, ...]
    c1_vertices: int
    c2_vertices: int
    c1_edges: int
    c2_edges: int
    c1_degree_profile: Dict[int, int]
    edge_counts: tuple[int, ...] = ()
    labels: np.ndarray | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sizes": list(self.sizes),
            "c1_vertices": self.c1_vertices,
            "c2_vertices": self.c2_vertices,
            "c1_edges": self.c1_edges,
            "c2_edges": self.c2_edges,
            "c1_degree_profile": _counts_to_json(self.c1_degree_profile),
        }


class DiagnosticStatus(str, Enum):
    PASS = "pass"
    WARN = "warn"
    FAIL = "fail"


@dataclass(frozen=True)
class Diagnostic:
    """One finite-n assumption proxy and its verdict."""

    code: str
    name: str
    value: float
    threshold: float
    status: DiagnosticStatus
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "code": self.code,
            "name": self.name,
            "value": self.value,
            "threshold": self.threshold,
            "status": self.status.value,
            "message": self.message,
        }


@dataclass(frozen=True)
class PredictionReport:
    """Flat prediction record emitted by ``limiar predict``."""

    r0: float
    alpha: float
    alpha_bar: float
    nu_proxy: float
    regime: str
    xi: float
    sigma2: float
    kappa: float
    predicted_size: float
    p_small: float | None
    p_small_corrected: float | None

    KEYS = (
        "r0",
        "alpha",
        "alpha_bar",
        "nu_proxy",
        "regime",
        "xi",
        "sigma2",
        "kappa",
        "predicted_size",
        "p_small",
        "p_small_corrected",
    )

    def to_dict(self) -> Dict[str, Any]:
        return {key: getattr(self, key) for key in self.KEYS}


# ---------------------------------------------------------------------------
# Run configuration document
# ---------------------------------------------------------------------------


def _section(d: Mapping[str, Any], name: str, allowed: Sequence[str]) -> Dict[str, Any]:
    """Return sub-mapping ``d[name]`` after rejecting unknown keys."""
    value = d.get(name, {}) or {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"'{name}' must be an object")
    unknown = sorted(set(value) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {', '.join(unknown)}")
    return dict(value)


def _number(value: Any, label: str, kind: type = float) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{label} must be a number")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{label} must be an integer")
        return int(value)
    return float(value)


@dataclass(frozen=True)
class ModelSection:
    """Where the graph comes from; exactly one source is set."""

    counts: Dict[int, int] | None = None
    degree_list: tuple[int, ...] | None = None
    poisson: tuple[int, float] | None = None
    gnp: tuple[int, float] | None = None
    gnm: tuple[int, int] | None = None
    config: Dict[str, Any] | None = None
    graph: str | None = None
    simple: bool = False

    KEYS = ("degrees", "poisson", "gnp", "gnm", "config", "graph", "simple")

    @staticmethod
    def from_dict(d: Mapping[str, Any], degree_list: Sequence[int] | None = None) -> "ModelSection":
        counts = None
        degrees = d.get("degrees")
        if degrees is not None:
            if not isinstance(degrees, Mapping) or set(degrees) - {"counts", "file"}:
                raise ConfigError("model.degrees must be {counts: {...}} or {file: path}")
            if "counts" in degrees:
                counts = _clean_counts(degrees["counts"], "model.degrees.counts")
            elif degree_list is None:
                raise ConfigError("model.degrees.file was not resolved")
        poisson = gnp = gnm = None
        if "poisson" in d:
            p = d["poisson"]
            poisson = (_number(p.get("n"), "poisson.n", int), _number(p.get("mean"), "poisson.mean"))
        if "gnp" in d:
            p = d["gnp"]
            gnp = (_number(p.get("n"), "gnp.n", int), _number(p.get("p"), "gnp.p"))
        if "gnm" in d:
            p = d["gnm"]
            gnm = (_number(p.get("n"), "gnm.n", int), _number(p.get("m"), "gnm.m", int))
        config = d.get("config")
        given = [x is not None for x in (counts, degree_list, poisson, gnp, gnm, config)]
        if sum(given) != 1:
            raise ConfigError(
                "model needs exactly one of degrees, poisson, gnp, gnm or config"
            )
        return ModelSection(
            counts=counts,
            degree_list=None if degree_list is None else tuple(int(k) for k in degree_list),
            poisson=poisson,
            gnp=gnp,
            gnm=gnm,
            config=None if config is None else dict(config),
            graph=d.get("graph"),
            simple=bool(d.get("simple", False)),
        )


@dataclass(frozen=True)
class StatesSection:
    n_I: int = 1
    n_R: int = 0
    mode: str = "uniform"
    by_degree: Dict[str, Any] | None = None
    placement: str = "uniform"
    alpha_power: float | None = None

    KEYS = ("n_I", "n_R", "mode", "by_degree", "placement", "seed_rule")

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "StatesSection":
        mode = d.get("mode", "uniform")
        if mode not in ("uniform", "by_degree"):
            raise ConfigError("states.mode must be 'uniform' or 'by_degree'")
        if mode == "by_degree" and not isinstance(d.get("by_degree"), Mapping):
            raise ConfigError("states.mode 'by_degree' needs states.by_degree")
        placement = d.get("placement", "uniform")
        if placement not in ("uniform", "high_degree"):
            raise ConfigError("states.placement must be 'uniform' or 'high_degree'")
        rule = d.get("seed_rule") or {}
        alpha_power = rule.get("alpha_power")
        return StatesSection(
            n_I=_number(d.get("n_I", 1), "states.n_I", int),
            n_R=_number(d.get("n_R", 0), "states.n_R", int),
            mode=mode,
            by_degree=d.get("by_degree"),
            placement=placement,
            alpha_power=None if alpha_power is None else _number(alpha_power, "seed_rule.alpha_power"),
        )


@dataclass(frozen=True)
class ExperimentSection:
    engine: str = "pairing"
    reps: int = 1
    epsilon: float = 0.5
    quenched: bool = False
    realisations: int = 1
    m_grid: tuple[int, ...] = ()
    x_values: tuple[float, ...] = ()
    grid: tuple[float, ...] | None = None
    grid_scaled: bool = True
    grid_points: int = 41
    nu_zero_below: float = 0.01
    nu_infinite_above: float = 100.0

    KEYS = (
        "engine",
        "reps",
        "epsilon",
        "quenched",
        "realisations",
        "m_grid",
        "x_values",
        "grid",
        "grid_scaled",
        "grid_points",
        "nu_zero_below",
        "nu_infinite_above",
    )

    @staticmethod
    def from_dict(d: Mapping[str, Any]) -> "ExperimentSection":
        grid = d.get("grid")
        return ExperimentSection(
            engine=str(d.get("engine", "pairing")),
            reps=_number(d.get("reps", 1), "experiment.reps", int),
            epsilon=_number(d.get("epsilon", 0.5), "experiment.epsilon"),
            quenched=bool(d.get("quenched", False)),
            realisations=_number(d.get("realisations", 1), "experiment.realisations", int),
            m_grid=tuple(_number(m, "experiment.m_grid", int) for m in d.get("m_grid", ())),
            x_values=tuple(_number(x, "experiment.x_values") for x in d.get("x_values", ())),
            grid=None if grid is None else tuple(_number(t, "experiment.grid") for t in grid),
            grid_scaled=bool(d.get("grid_scaled", True)),
            grid_points=_number(d.get("grid_points", 41), "experiment.grid_points", int),
            nu_zero_below=_number(d.get("nu_zero_below", 0.01), "experiment.nu_zero_below"),
            nu_infinite_above=_number(
                d.get("nu_infinite_above", 100.0), "experiment.nu_infinite_above"
            ),
        )


@dataclass(frozen=True)
class RunConfig:
    """Parsed config document shared by every subcommand."""

    model: ModelSection
    states: StatesSection = field(default_factory=StatesSection)
    beta: float = 1.0
    rho: float = 1.0
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    seed: int = 0
    log_level: str = "WARNING"

    TOP_LEVEL = ("model", "states", "rates", "experiment", "rng", "logging")

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ConfigError("rng.seed must be non-negative")
        if self.experiment.reps < 1:
            raise ConfigError("experiment.reps must be at least 1")

    @staticmethod
    def from_dict(d: Mapping[str, Any], degree_list: Sequence[int] | None = None) -> "RunConfig":
        """Parse a config document.

        Args:
            d: Decoded JSON document.
            degree_list: Per-vertex degrees already read from the sidecar file
                named by ``model.degrees.file``.

        Raises:
            ConfigError: On unknown keys, missing sources or bad values.
        """
        if not isinstance(d, Mapping):
            raise ConfigError("config document must be a JSON object")
        unknown = sorted(set(d) - set(RunConfig.TOP_LEVEL))
        if unknown:
            raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
        try:
            model = ModelSection.from_dict(_section(d, "model", ModelSection.KEYS), degree_list)
            states = StatesSection.from_dict(_section(d, "states", StatesSection.KEYS))
            rates = _section(d, "rates", ("beta", "rho"))
            experiment = ExperimentSection.from_dict(
                _section(d, "experiment", ExperimentSection.KEYS)
            )
            rng = _section(d, "rng", ("seed",))
            logging_section = _section(d, "logging", ("level",))
            return RunConfig(
                model=model,
                states=states,
                beta=_number(rates.get("beta", 1.0), "rates.beta"),
                rho=_number(rates.get("rho", 1.0), "rates.rho"),
                experiment=experiment,
                seed=_number(rng.get("seed", 0), "rng.seed", int),
                log_level=str(logging_section.get("level", "WARNING")).upper(),
            )
        except (AttributeError, TypeError) as exc:
            raise ConfigError(f"malformed config document: {exc}") from exc
