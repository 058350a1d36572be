"""
Application service layer for limiar.

This module defines the `App` class, which turns a parsed
:class:`~limiar.models.RunConfig` into experiment specifications and runs the
analytic predictions, diagnostics and simulations behind every CLI
subcommand. It returns result objects; writing them out goes through the
injected exporter.

Typical Usage:
    config = ConfigStore("fig1.json").load()
    app = App(config)
    report = app.predict()
    result = app.simulate()
    app.export_result(result, "out.json", "json")
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Any, List

import numpy as np

from .core.degree_model import RegimeThresholds, predict, validate_assumptions
from .core.giant_component import GiantLawReport, verify_giant_law
from .core.graph_gen import StateAssignment, degrees_from_configuration, sample_poisson_degrees
from .core.harness import (
    SCATTER_HEADER,
    AggregateResult,
    DegreeSequence,
    EngineKind,
    ExperimentSpec,
    GnmRecipe,
    GnpRecipe,
    PoissonRecipe,
    SeedRule,
    Source,
    SurvivalPoint,
    TrajectoryRun,
    build_graph,
    figure_fs_scatter,
    realise,
    run_experiment,
    survival_curve,
    trajectories,
)
from .errors import ConfigError
from .export.report_exporter import ExportFormat, ReportExporter
from .log import get_logger
from .models import DegreeConfiguration, Diagnostic, PredictionReport, RunConfig
from .rng import StreamPurpose, stream
from .storage.graph_store import load_graph

logger = get_logger(__name__)

DEFAULT_SWEEP_MAX = 100


class App:
    """High-level interface from a run configuration to results.

    Attributes:
        config: The parsed config document (with CLI overrides applied).
        exporter: Writer used by :meth:`export_result`.
        threads: Worker threads for replica-parallel runs (0 = all cores).
    """

    def __init__(
        self,
        config: RunConfig,
        exporter: ReportExporter | None = None,
        threads: int = 1,
    ) -> None:
        self.config = config
        self.exporter = exporter or ReportExporter()
        self.threads = threads
        self._spec: ExperimentSpec | None = None

    # -- spec construction -------------------------------------------------

    def source(self) -> Source:
        """Graph source described by the ``model`` and ``states`` sections."""
        m = self.config.model
        rc = self.config
        if self.config.states.mode == "by_degree":
            return DegreeConfiguration.from_dict({**rc.states.by_degree, "beta": rc.beta, "rho": rc.rho})
        if m.config is not None:
            return DegreeConfiguration.from_dict({**m.config, "beta": rc.beta, "rho": rc.rho})
        if m.counts is not None:
            return DegreeSequence(tuple(k for k, c in sorted(m.counts.items()) for _ in range(c)))
        if m.degree_list is not None:
            return DegreeSequence(m.degree_list)
        if m.poisson is not None:
            return PoissonRecipe(*m.poisson)
        if m.gnp is not None:
            return GnpRecipe(*m.gnp)
        return GnmRecipe(*m.gnm)

    def spec(self) -> ExperimentSpec:
        """The resolved :class:`ExperimentSpec`, built once."""
        if self._spec is None:
            rc = self.config
            ex = rc.experiment
            try:
                engine = EngineKind(ex.engine)
            except ValueError as exc:
                raise ConfigError(f"unknown engine '{ex.engine}'") from exc
            placement = (
                StateAssignment.HIGH_DEGREE
                if rc.states.placement == "high_degree"
                else StateAssignment.UNIFORM_RANDOM
            )
            try:
                thresholds = RegimeThresholds(ex.nu_zero_below, ex.nu_infinite_above)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            self._spec = ExperimentSpec(
                source=self.source(),
                engine=engine,
                reps=ex.reps,
                master_seed=rc.seed,
                classification_epsilon=ex.epsilon,
                beta=rc.beta,
                rho=rc.rho,
                seeds=SeedRule(rc.states.n_I, rc.states.n_R, placement, rc.states.alpha_power),
                pinned_graph=None if rc.model.graph is None else load_graph(rc.model.graph),
                quenched=ex.quenched,
                simple=rc.model.simple,
                thresholds=thresholds,
                grid=ex.grid or (),
                threads=self.threads,
            )
        return self._spec

    def configuration(self) -> DegreeConfiguration:
        """Configuration used by ``predict`` and ``validate``.

        Explicit configurations are used as given; recipes are realised once
        on the pilot stream.
        """
        spec = self.spec()
        if isinstance(spec.source, DegreeConfiguration) and spec.pinned_graph is None:
            return spec.source
        rng = stream(spec.master_seed, StreamPurpose.PILOT)
        return realise(spec, rng, need_graph=False).config

    # -- subcommands -------------------------------------------------------

    def predict(self) -> PredictionReport:
        return predict(self.configuration(), self.spec().thresholds)

    def validate(self) -> List[Diagnostic]:
        return validate_assumptions(self.configuration())

    def simulate(self) -> AggregateResult:
        return run_experiment(self.spec())

    def sellke_sweep(self) -> List[tuple[int, int, int, int]]:
        spec = replace(self.spec(), engine=EngineKind.SELLKE)
        m_grid = self.config.experiment.m_grid or tuple(
            range(1, min(spec.n, DEFAULT_SWEEP_MAX) + 1)
        )
        return figure_fs_scatter(spec, self.config.experiment.realisations, m_grid)

    def trajectories(self) -> TrajectoryRun:
        ex = self.config.experiment
        return trajectories(self.spec(), ex.grid, scaled=ex.grid_scaled, points=ex.grid_points)

    def giant(self) -> GiantLawReport:
        spec = self.spec()
        src = spec.source
        if spec.pinned_graph is not None:
            degrees = spec.pinned_graph.degrees
        elif isinstance(src, DegreeSequence):
            degrees = np.asarray(src.degrees, dtype=np.int64)
        elif isinstance(src, DegreeConfiguration):
            degrees, _ = degrees_from_configuration(src)
        elif isinstance(src, PoissonRecipe):
            degrees = sample_poisson_degrees(src.n, src.mean, stream(spec.master_seed, StreamPurpose.GIANT, 0))
        else:
            degrees = build_graph(spec, stream(spec.master_seed, StreamPurpose.GIANT, 0)).degrees
        return verify_giant_law(degrees, spec.reps, stream(spec.master_seed, StreamPurpose.GIANT, 1))

    def survival_curve(self) -> List[SurvivalPoint]:
        x_values = self.config.experiment.x_values
        if not x_values:
            raise ConfigError("survival-curve needs experiment.x_values")
        return survival_curve(self.spec(), x_values)

    # -- output ------------------------------------------------------------

    def export_result(self, result: Any, path: str | Path, fmt: ExportFormat | str) -> None:
        """Write any subcommand result in the requested format.

        JSON outputs of simulations embed the resolved experiment spec.
        """
        spec = self.spec().to_dict()
        if isinstance(result, PredictionReport):
            d = result.to_dict()
            self.exporter.export_report(
                {**d, "spec": spec}, path, fmt, table=(list(d), [list(d.values())])
            )
        elif isinstance(result, AggregateResult):
            self.exporter.export_report(result.to_dict(), path, fmt, table=(result.header(), result.rows()))
        elif isinstance(result, TrajectoryRun):
            record = result.record
            report = {
                "spec": spec,
                "tau_end": result.outcome.duration,
                "final_size": result.outcome.final_size,
                "alpha_bar": result.report.alpha_bar,
                "xi": result.report.xi,
                "deviation_f_I": result.deviation_f_I,
                "deviation_f": result.deviation_f,
                "trajectory": record.to_dict(),
            }
            self.exporter.export_report(report, path, fmt, table=(record.header(), record.rows()))
        elif isinstance(result, GiantLawReport):
            rows = [[d["k"], d["mean"], d["stderr"], d["predicted"]] for d in result.per_degree]
            self.exporter.export_report(
                {**result.to_dict(), "spec": spec},
                path,
                fmt,
                table=(["k", "mean", "stderr", "predicted"], rows),
            )
        elif isinstance(result, list) and result and isinstance(result[0], Diagnostic):
            header = ["code", "name", "value", "threshold", "status", "message"]
            rows = [[d.to_dict()[h] for h in header] for d in result]
            self.exporter.export_report(
                {"diagnostics": [d.to_dict() for d in result], "spec": spec},
                path,
                fmt,
                table=(header, rows),
            )
        elif isinstance(result, list) and result and isinstance(result[0], SurvivalPoint):
            rows = [p.row() for p in result]
            self.exporter.export_report(
                {"points": [p.to_dict() for p in result], "spec": spec},
                path,
                fmt,
                table=(list(SurvivalPoint.HEADER), rows),
            )
        elif isinstance(result, list):
            # sellke scatter rows
            self.exporter.export_report(
                {"rows": [dict(zip(SCATTER_HEADER, r)) for r in result], "spec": spec},
                path,
                fmt,
                table=(list(SCATTER_HEADER), result),
            )
        else:
            raise TypeError(f"cannot export {type(result).__name__}")
        logger.info("wrote %s", path)
