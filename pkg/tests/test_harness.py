import math
from dataclasses import replace

import numpy as np
import pytest

from limiar.core.graph_gen import StateAssignment, degrees_from_configuration, sample_multigraph
from limiar.core.harness import (
    DegreeSequence,
    EngineKind,
    ExperimentSpec,
    GnpRecipe,
    PoissonRecipe,
    Realisation,
    SeedRule,
    _single_seed_config,
    degree_profile_check,
    figure_fs_scatter,
    make_engine,
    p_large_estimate,
    realise,
    reference_law,
    run_experiment,
    survival_curve,
    trajectories,
)
from limiar.core.sir_dynamics import exact_configuration_final_size_distribution
from limiar.errors import ConfigError, NoLargeOutbreaks, TargetUnreachable
from limiar.models import DegreeConfiguration, EpidemicOutcome, OutcomeClass
from limiar.rng import StreamPurpose, stream

from .conftest import assert_law_fits

NEAR_CRITICAL = PoissonRecipe(20_000, 2.1)


def test_results_do_not_depend_on_threads():
    spec = ExperimentSpec(PoissonRecipe(2000, 2.2), reps=8, master_seed=11, seeds=SeedRule(n_I=3))
    one = run_experiment(spec)
    many = run_experiment(replace(spec, threads=4))
    assert [r.outcome.final_size for r in one.replicas] == [r.outcome.final_size for r in many.replicas]
    assert [r.outcome.classification for r in one.replicas] == [
        r.outcome.classification for r in many.replicas
    ]
    assert one.p_large == many.p_large
    assert one.spec.to_dict() == many.spec.to_dict()


def test_subcritical_replicas_are_small():
    spec = ExperimentSpec(DegreeSequence((2,) * 100), reps=4, seeds=SeedRule(n_I=2))
    result = run_experiment(spec)
    assert len(result.replicas) == 4
    assert all(r.regime is None and r.ratio_kind == "none" for r in result.replicas)
    assert all(r.outcome.classification is OutcomeClass.SMALL for r in result.replicas)
    assert result.p_large.mean == 0.0
    assert result.degree_profile_tv is None
    assert result.mean_p_small is None


def test_quenched_replicas_share_the_graph():
    spec = ExperimentSpec(
        GnpRecipe(500, 3.0 / 500), reps=5, master_seed=3, seeds=SeedRule(n_I=2), quenched=True
    )
    result = run_experiment(spec)
    totals = {sum(k * c for k, c in r.susceptible.items()) + r.x_I0 for r in result.replicas}
    assert len(totals) == 1


@pytest.mark.parametrize("engine", list(EngineKind))
def test_every_engine_runs_on_a_configuration(engine):
    config = DegreeConfiguration({1: 200, 3: 200}, {3: 2}, {2: 2}, beta=1.0, rho=0.1)
    spec = ExperimentSpec(config, engine=engine, reps=3, master_seed=5)
    result = run_experiment(spec)
    assert not result.failures
    for r in result.replicas:
        assert 0 <= r.outcome.final_size <= config.n_S
        assert 2 not in r.outcome.final_size_by_degree
        assert r.outcome.n_initial_infective == 2
        assert r.regime in ("NuZero", "NuFinite", "NuInfinite")


def test_only_graph_engines_need_a_graph():
    needs = {kind: make_engine(kind).needs_graph for kind in EngineKind}
    assert needs == {
        EngineKind.GILLESPIE: True,
        EngineKind.PAIRING: False,
        EngineKind.TIME_CHANGED: False,
        EngineKind.SELLKE: True,
    }
    assert all(type(make_engine(kind)).__doc__ for kind in EngineKind)


def _c(S, I, R=None, beta=1.0, rho=1.0):
    return DegreeConfiguration(S, I, R or {}, beta=beta, rho=rho)


SMALL_CONFIGURATIONS = [
    pytest.param(_c({1: 2}, {2: 1}), id="p3"),
    pytest.param(_c({3: 3}, {3: 1}), id="k4-degrees"),
    pytest.param(_c({2: 1}, {2: 1}), id="loops"),
    pytest.param(_c({}, {2: 1}), id="lone-loop"),
    pytest.param(_c({1: 4}, {2: 1}, rho=0.5), id="star"),
    pytest.param(_c({1: 2, 2: 1}, {2: 1}, beta=2.0, rho=0.3), id="mixed"),
    pytest.param(_c({3: 2}, {2: 1}), id="cubic-pair"),
    pytest.param(_c({1: 3, 3: 1}, {2: 1}, rho=0.0), id="no-recovery"),
    pytest.param(_c({2: 3}, {1: 2}, rho=0.7), id="two-leaf-seeds"),
    pytest.param(_c({1: 2, 3: 2}, {2: 1}), id="ten-half-edges"),
    pytest.param(_c({1: 1, 2: 2}, {1: 1}, {2: 1}, rho=0.5), id="with-recovered"),
    pytest.param(_c({4: 1, 1: 2}, {2: 1}, rho=2.0), id="fast-recovery"),
    pytest.param(_c({2: 2, 1: 2}, {3: 1, 1: 1}, beta=0.5), id="slow-infection"),
    pytest.param(_c({1: 4}, {1: 2}, rho=0.2), id="leaves"),
]


@pytest.mark.slow
@pytest.mark.parametrize("engine", list(EngineKind))
@pytest.mark.parametrize("config", SMALL_CONFIGURATIONS)
def test_engines_match_exact_configuration_law(config, engine):
    law = exact_configuration_final_size_distribution(config)
    runner = make_engine(engine)
    degrees, states = degrees_from_configuration(config)
    rng = np.random.default_rng(4417)
    sizes = []
    for _ in range(20_000):
        if runner.needs_graph:
            realisation = Realisation(config, sample_multigraph(degrees, rng), states)
        else:
            realisation = Realisation(config)
        sizes.append(runner.run(realisation, rng).final_size)
    assert_law_fits(sizes, law)


def test_seed_placement_comes_from_the_replica_stream():
    spec = ExperimentSpec(DegreeSequence((1, 2, 3) * 50), seeds=SeedRule(n_I=4), engine=EngineKind.GILLESPIE)
    a = realise(spec, stream(3, StreamPurpose.REPLICA, 2), need_graph=True)
    b = realise(spec, stream(3, StreamPurpose.REPLICA, 2), need_graph=True)
    c = realise(spec, stream(3, StreamPurpose.REPLICA, 5), need_graph=True)
    assert np.array_equal(a.states, b.states)
    assert int((a.states == 1).sum()) == 4
    assert not np.array_equal(a.states, c.states) or not np.array_equal(a.graph.edges, c.graph.edges)


def test_realise_config_source_keeps_counts():
    config = DegreeConfiguration({1: 20, 3: 10}, {2: 3}, {1: 2})
    spec = ExperimentSpec(config, engine=EngineKind.GILLESPIE)
    r = realise(spec, stream(0, StreamPurpose.REPLICA), need_graph=True)
    assert r.config == config
    assert r.graph.degrees.sum() == config.total_degree
    lazy = realise(spec, stream(0, StreamPurpose.REPLICA), need_graph=False)
    assert lazy.graph is None and lazy.config == config


def test_config_source_sets_rates():
    config = DegreeConfiguration({1: 2}, {2: 1}, beta=2.5, rho=0.3)
    spec = ExperimentSpec(config, beta=1.0, rho=1.0)
    assert (spec.beta, spec.rho) == (2.5, 0.3)
    assert spec.to_dict()["source"]["kind"] == "config"


@pytest.mark.parametrize(
    "kwargs",
    [{"reps": 0}, {"classification_epsilon": 1.5}, {"master_seed": -2}, {"threads": -1}],
)
def test_spec_validation(kwargs):
    with pytest.raises(ConfigError):
        ExperimentSpec(PoissonRecipe(10, 2.0), **kwargs)


def test_seed_rule():
    assert SeedRule(alpha_power=2.0).resolve_n_I(10**6, 0.01) == 2000
    assert SeedRule(n_I=7).resolve_n_I(10**6, 0.01) == 7
    with pytest.raises(ConfigError):
        SeedRule(placement=StateAssignment.BY_DEGREE_SPEC)
    with pytest.raises(ConfigError):
        SeedRule(n_I=-1)


def test_reference_law():
    alpha, mean = reference_law(ExperimentSpec(PoissonRecipe(100, 2.02)))
    assert alpha == pytest.approx(0.0404, rel=1e-6)
    assert mean == pytest.approx(2.02)
    alpha, mean = reference_law(ExperimentSpec(DegreeSequence((1, 1, 3, 3)), rho=0.0))
    assert mean == 2.0
    assert alpha == pytest.approx(3.0 - 2.0)


def test_p_large_estimate():
    est = p_large_estimate(3, 10)
    assert est.mean == 0.3
    assert est.stderr == pytest.approx(math.sqrt(0.3 * 0.7 / 10))
    assert math.isnan(p_large_estimate(0, 0).mean)


def test_degree_profile_check():
    large = EpidemicOutcome(4, {1: 1, 3: 3}, classification=OutcomeClass.LARGE)
    small = EpidemicOutcome(2, {1: 2}, classification=OutcomeClass.SMALL)
    assert degree_profile_check([large, small], {1: 10, 3: 10}) == pytest.approx(0.0)
    skewed = EpidemicOutcome(4, {1: 4}, classification=OutcomeClass.LARGE)
    assert degree_profile_check([skewed], {1: 10, 3: 10}) == pytest.approx(0.75)
    with pytest.raises(NoLargeOutbreaks):
        degree_profile_check([small], {1: 10, 3: 10})


def test_single_seed_config_keeps_parity():
    config = DegreeConfiguration({1: 500, 3: 500}, {2: 1}, beta=1.0, rho=0.1)
    seeded, k = _single_seed_config(config, 3.0)
    assert seeded.n_I_by_degree == {k: 1}
    assert seeded.total_degree % 2 == 0
    alpha = 3.0 - 1.1 * seeded.total_degree / 1000
    assert abs(k * alpha - 3.0) <= 0.3
    # alpha is recomputed for every candidate degree
    best = min(range(2, 200, 2), key=lambda j: abs(j * (3.0 - 1.1 * (2000 + j) / 1000) - 3.0))
    assert k == best
    with pytest.raises(TargetUnreachable):
        _single_seed_config(config, 1e6)


def test_survival_curve_uniform_seeds():
    # alpha * mean degree = 0.441 for Poisson(2.1) with beta = rho
    spec = ExperimentSpec(NEAR_CRITICAL, reps=10, master_seed=2)
    points = survival_curve(spec, [0.882, 1.764])
    assert [p.seeds for p in points] == [2, 4]
    for p in points:
        assert 0.0 <= p.p_small.mean <= 1.0
        assert p.predicted is not None and 0.0 < p.predicted < 1.0
        assert p.predicted_gnp is None
        assert len(p.row()) == len(p.HEADER)


def test_survival_curve_gnp_prediction():
    spec = ExperimentSpec(GnpRecipe(20_000, 2.1 / 20_000), reps=4, master_seed=2)
    (point,) = survival_curve(spec, [0.882])
    assert point.predicted_gnp is not None and 0.0 < point.predicted_gnp < 1.0


def test_survival_curve_argument_checks():
    spec = ExperimentSpec(NEAR_CRITICAL, reps=2)
    with pytest.raises(TargetUnreachable):
        survival_curve(spec, [0.0])
    with pytest.raises(TargetUnreachable):
        survival_curve(spec, [0.05])
    high = ExperimentSpec(NEAR_CRITICAL, seeds=SeedRule(placement=StateAssignment.HIGH_DEGREE))
    with pytest.raises(ConfigError):
        survival_curve(high, [1.0])
    config = ExperimentSpec(DegreeConfiguration({1: 500, 3: 500}, {3: 2}, rho=0.1))
    with pytest.raises(ConfigError):
        survival_curve(config, [1.0])


def test_survival_curve_single_high_degree_seed():
    config = DegreeConfiguration({1: 500, 3: 500}, {2: 1}, beta=1.0, rho=0.1)
    spec = ExperimentSpec(
        config, reps=5, seeds=SeedRule(placement=StateAssignment.HIGH_DEGREE)
    )
    (point,) = survival_curve(spec, [3.0])
    assert point.seeds == 1
    assert point.seed_degree % 2 == 0
    assert point.achieved == pytest.approx(3.0, rel=0.1)


def test_figure_scatter_rows():
    spec = ExperimentSpec(PoissonRecipe(500, 2.5), engine=EngineKind.SELLKE, master_seed=4)
    rows = figure_fs_scatter(spec, 2, [20, 1, 5])
    assert [r[0] for r in rows] == [0, 0, 0, 1, 1, 1]
    assert [r[1] for r in rows] == [1, 5, 20, 1, 5, 20]
    for rid in (0, 1):
        mine = [r for r in rows if r[0] == rid]
        assert all(a[2] <= b[2] and a[3] <= b[3] for a, b in zip(mine, mine[1:]))
        assert all(z >= m for _, m, _, z in mine)
    with pytest.raises(ConfigError):
        figure_fs_scatter(ExperimentSpec(PoissonRecipe(500, 2.5)), 1, [1])


@pytest.mark.parametrize("m_grid", [[1, 501], [0, 5], []])
def test_figure_scatter_rejects_seed_counts_outside_the_graph(m_grid):
    spec = ExperimentSpec(PoissonRecipe(500, 2.5), engine=EngineKind.SELLKE)
    with pytest.raises(ConfigError):
        figure_fs_scatter(spec, 1, m_grid)


def test_trajectories_default_grid():
    spec = ExperimentSpec(NEAR_CRITICAL, master_seed=9, seeds=SeedRule(n_I=5))
    run = trajectories(spec, points=11)
    assert len(run.record.grid) == 11
    assert run.record.grid[-1] == pytest.approx(2 * run.report.xi * run.report.alpha_bar)
    assert run.outcome.time_scale == "time_changed"
    assert run.deviation_f_I >= 0 and run.deviation_f >= 0
    assert run.n == 20_000
    unscaled = trajectories(spec, grid=[0.0, 1.0], scaled=False)
    assert unscaled.record.grid == (0.0, 1.0)
    assert np.isfinite(unscaled.outcome.duration)
