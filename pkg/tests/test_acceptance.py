"""Large-n checks of the limit laws. Run with ``pytest -m slow``."""

import numpy as np
import pytest

from limiar.core.degree_model import Regime, RegimeThresholds
from limiar.core.giant_component import verify_giant_law
from limiar.core.graph_gen import sample_poisson_degrees
from limiar.core.harness import (
    DegreeSequence,
    EngineKind,
    ExperimentSpec,
    GnpRecipe,
    PoissonRecipe,
    SeedRule,
    figure_fs_scatter,
    reference_law,
    run_experiment,
    survival_curve,
    trajectories,
)
from limiar.models import DegreeConfiguration, OutcomeClass

pytestmark = pytest.mark.slow


def test_large_outbreaks_match_the_final_size_prediction():
    # alpha = 3 - 1.47 * (2 * 10**6 + 30) / 10**6, close to 0.06; nu about 0.008
    config = DegreeConfiguration({1: 500_000, 3: 500_000}, {3: 10}, beta=1.0, rho=0.47)
    result = run_experiment(ExperimentSpec(config, reps=30, master_seed=1, threads=0))
    assert all(r.regime == "NuZero" for r in result.replicas)
    large = [r for r in result.replicas if r.outcome.classification is OutcomeClass.LARGE]
    assert len(large) >= 3
    ratio = np.mean([r.outcome.final_size / r.predicted_size for r in large])
    assert abs(ratio - 1.0) < 0.25
    assert result.degree_profile_tv < 0.1


def test_many_seeds_give_square_root_outbreaks():
    # alpha = 3 - 1.499 * 2 = 0.002 before seeding; alpha_power = 4 gives 358 seeds, nu near 800
    degrees = (1,) * 500_000 + (3,) * 500_000
    spec = ExperimentSpec(
        DegreeSequence(degrees),
        rho=0.499,
        reps=200,
        master_seed=8,
        seeds=SeedRule(alpha_power=4.0),
        threads=0,
    )
    result = run_experiment(spec)
    assert not result.failures
    assert all(r.regime == "NuInfinite" for r in result.replicas)
    assert all(r.x_I0 < 0.002 * spec.n for r in result.replicas)
    large = [r for r in result.replicas if r.outcome.classification is OutcomeClass.LARGE]
    assert len(large) >= 190
    assert result.ratio_kind == "sqrt"
    # Z / sqrt(n_S X_I0) against sqrt(2) lambda / sqrt(lambda_3)
    expected = np.mean([r.predicted_size / np.sqrt(sum(r.susceptible.values()) * r.x_I0) for r in large])
    assert abs(result.large_mean_ratio.mean / expected - 1.0) < 0.1


def test_small_outbreak_probability_on_a_poisson_configuration():
    spec = ExperimentSpec(
        PoissonRecipe(10**6, 2.03),
        reps=2000,
        master_seed=21,
        thresholds=RegimeThresholds(nu_zero_below=0.05),
        threads=0,
    )
    for point in survival_curve(spec, [0.5, 1.0, 2.0]):
        assert point.predicted is not None
        assert abs(point.achieved / point.target - 1.0) < 0.1
        assert abs(point.p_small.mean - point.predicted) < 0.05, point


def test_small_outbreak_probability_on_gnp():
    n = 10**6
    spec = ExperimentSpec(GnpRecipe(n, 2.03 / n), reps=2000, master_seed=22, threads=0)
    for point in survival_curve(spec, [0.5, 1.0, 2.0]):
        assert point.predicted_gnp is not None
        assert abs(point.p_small.mean - point.predicted_gnp) < 0.05, point


def test_time_changed_trajectories_follow_their_limits():
    n, seeds = 4 * 10**6, 30
    spec = ExperimentSpec(
        PoissonRecipe(n, 2.03), engine=EngineKind.TIME_CHANGED, master_seed=2, seeds=SeedRule(n_I=seeds)
    )
    runs = []
    for replica in range(80):
        run = trajectories(spec, replica=replica)
        r = run.report
        predicted = 2.0 * r.moments.lam / r.moments.lam3 * r.alpha * (run.n - seeds)
        if run.outcome.final_size > 0.5 * predicted:
            runs.append(run)
        if len(runs) == 20:
            break
    assert len(runs) == 20
    for run in runs:
        assert run.report.regime is Regime.NU_ZERO
        assert run.deviation_f_I < 0.1
        assert run.deviation_f < 0.1
    durations = [run.outcome.duration / run.report.alpha_bar / run.report.xi for run in runs]
    assert abs(np.mean(durations) - 1.0) < 0.15


def test_sellke_scatter_has_a_large_branch_at_the_predicted_size():
    n = 10**5
    spec = ExperimentSpec(PoissonRecipe(n, 2.2), engine=EngineKind.SELLKE, master_seed=6, threads=0)
    rows = figure_fs_scatter(spec, 200, [1, 2, 4, 8, 16, 32])
    alpha, lam = reference_law(spec)
    # Poisson degrees: lambda_3 = lambda^3
    ratios = []
    for _, m, x_I0, z in rows:
        if alpha * x_I0 <= 3:
            continue
        predicted = 2.0 * lam / lam**3 * (n - m) * alpha
        ratios.append(z / predicted)
    ratios = np.array(ratios)
    assert ratios.size > 100
    large = ratios[ratios > 0.5]
    assert large.size > 0.5 * ratios.size
    # bimodal: nothing between the branches
    assert np.mean((ratios > 0.1) & (ratios <= 0.5)) < 0.05
    assert abs(large.mean() - 1.0) < 0.3
    assert np.mean(np.abs(large - 1.0) < 0.3) > 0.9


def test_giant_component_in_the_barely_supercritical_window():
    n = 10**6
    rng = np.random.default_rng(5)
    degrees = sample_poisson_degrees(n, 1.0 + n**-0.25, rng)
    report = verify_giant_law(degrees, 20, rng)
    assert report.reps == 20
    predicted = report.constants.c1_prediction
    assert abs(report.c1_over_nalpha.mean / predicted - 1.0) < 0.15
    assert report.c2_over_nalpha.mean < 0.1


@pytest.mark.parametrize("engine", [EngineKind.PAIRING, EngineKind.TIME_CHANGED, EngineKind.SELLKE])
def test_engines_agree_with_gillespie(engine):
    config = DegreeConfiguration({1: 30, 3: 30}, {2: 1}, beta=1.0, rho=0.5)
    reps = 4000
    reference = run_experiment(ExperimentSpec(config, engine=EngineKind.GILLESPIE, reps=reps, threads=0))
    other = run_experiment(ExperimentSpec(config, engine=engine, reps=reps, master_seed=1, threads=0))
    a = np.array([o.final_size for o in reference.outcomes], dtype=float)
    b = np.array([o.final_size for o in other.outcomes], dtype=float)
    spread = np.sqrt(a.var() / reps + b.var() / reps)
    assert abs(a.mean() - b.mean()) < 4 * spread
    # the small-outbreak mass must match too
    assert abs(np.mean(a == 0) - np.mean(b == 0)) < 4 * np.sqrt(0.25 / reps * 2)
