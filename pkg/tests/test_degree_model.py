import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from limiar.core.degree_model import (
    Regime,
    RegimeThresholds,
    alpha_from_moments,
    alpha_via_r0,
    compute_alpha,
    compute_criticality,
    compute_r0,
    gnp_corollary,
    moments_from_pmf,
    poisson_pmf,
    predict,
    predict_final_size,
    predict_small_outbreak_probability,
    psi_n,
    validate_assumptions,
    y_moments,
    y_pmf,
)
from limiar.core.graph_gen import configuration_from_states, sample_poisson_degrees
from limiar.errors import (
    NoSusceptibles,
    RegimeMismatch,
    Subcritical,
    ZeroTotalDegree,
)
from limiar.models import DegreeConfiguration, DiagnosticStatus


def near_critical(x_I_vertices=2, rho=0.1):
    """Susceptible degrees 1 and 3 in equal numbers, infectives of degree 3."""
    return DegreeConfiguration({1: 500, 3: 500}, {3: x_I_vertices}, beta=1.0, rho=rho)


def test_r0_two_regular_is_half():
    assert compute_r0(DegreeConfiguration({2: 10})) == pytest.approx(0.5)


def test_r0_without_recovery_is_degree_ratio():
    c = DegreeConfiguration({1: 4, 3: 2}, {2: 1}, rho=0.0)
    assert compute_r0(c) == pytest.approx((3 * 2 * 2) / 12)


def test_r0_zero_total_degree():
    with pytest.raises(ZeroTotalDegree):
        compute_r0(DegreeConfiguration({0: 5}))


def test_alpha_critical_two_regular():
    assert compute_alpha(DegreeConfiguration({2: 10}, rho=0.0)) == 0.0
    with pytest.raises(Subcritical):
        compute_criticality(DegreeConfiguration({2: 10}, rho=0.0))


def test_alpha_needs_susceptibles():
    with pytest.raises(NoSusceptibles):
        compute_alpha(DegreeConfiguration({}, {2: 2}))


def test_alpha_of_exact_poisson_law():
    m = moments_from_pmf(poisson_pmf(2.02))
    assert alpha_from_moments(m, 1.0, 1.0) == pytest.approx(0.0404, rel=1e-8)
    assert m.lam2 == pytest.approx(2.02**2, rel=1e-8)
    assert m.lam3 == pytest.approx(2.02**3, rel=1e-8)


@pytest.mark.parametrize(
    "config",
    [
        near_critical(),
        DegreeConfiguration({1: 7, 2: 3, 4: 5}, {1: 2, 3: 1}, {2: 2}, beta=2.0, rho=0.7),
        DegreeConfiguration({3: 4}, {1: 2}, rho=0.0),
    ],
)
def test_alpha_matches_r0_identity(config):
    assert compute_alpha(config) == pytest.approx(alpha_via_r0(config), abs=1e-12)


def test_r0_of_sampled_poisson_degrees(rng):
    degrees = sample_poisson_degrees(10**6, 2.02, rng)
    states = np.zeros(degrees.size, dtype=np.int8)
    config = configuration_from_states(degrees, states, 1.0, 1.0)
    assert 1.005 <= compute_r0(config) <= 1.015


def test_xi_nu_zero():
    report = compute_criticality(near_critical())
    assert report.regime is Regime.NU_ZERO
    assert report.nu == 0.0
    assert report.xi == pytest.approx(2.0 / report.moments.lam3)


def test_xi_nu_infinite():
    config = near_critical(x_I_vertices=100)
    report = compute_criticality(config, RegimeThresholds(0.01, 1.0))
    assert report.regime is Regime.NU_INFINITE
    assert report.xi == pytest.approx(math.sqrt(2.0 / report.moments.lam3))
    assert report.alpha_bar == pytest.approx(math.sqrt(config.x_I0 / config.n))


def test_xi_nu_finite_is_root_of_f():
    report = compute_criticality(near_critical(x_I_vertices=100))
    assert report.regime is Regime.NU_FINITE
    lam3 = report.moments.lam3
    assert report.xi == pytest.approx((1 + math.sqrt(1 + 2 * report.nu * lam3)) / lam3)
    assert abs(report.f(report.xi)) < 1e-12
    grid = np.linspace(0, report.xi, 22)[1:-1]
    assert np.all(report.f(grid) > 0)


def test_kappa_identity_without_recovered():
    report = compute_criticality(near_critical())
    m = report.moments
    assert report.kappa == pytest.approx(2 * m.lam / (m.lam2**2 * report.sigma2), abs=1e-12)


def test_final_size_nu_zero_formula():
    config = near_critical()
    report = compute_criticality(config)
    size, profile = predict_final_size(report, config)
    m = report.moments
    assert size == pytest.approx(2 * m.lam / m.lam3 * config.n_S * report.alpha)
    assert sum(profile.values()) == pytest.approx(1.0)
    assert profile[3] == pytest.approx(3 * 0.5 / m.lam)


def test_final_size_nu_infinite_formula():
    config = near_critical(x_I_vertices=100)
    report = compute_criticality(config, RegimeThresholds(0.01, 1.0))
    size, _ = predict_final_size(report, config)
    m = report.moments
    expected = math.sqrt(2) * m.lam * math.sqrt(config.n_S * config.x_I0) / math.sqrt(m.lam3)
    assert size == pytest.approx(expected)


def test_small_outbreak_probability_needs_nu_zero():
    config = near_critical(x_I_vertices=100)
    report = compute_criticality(config)
    with pytest.raises(RegimeMismatch):
        predict_small_outbreak_probability(report, config)


def test_small_outbreak_probability_values():
    config = near_critical()
    report = compute_criticality(config)
    plain = predict_small_outbreak_probability(report, config)
    corrected = predict_small_outbreak_probability(report, config, corrected=True)
    assert plain == pytest.approx(math.exp(-report.kappa * report.alpha * config.x_I0))
    assert plain <= corrected <= 1.0


def test_corrected_equals_plain_without_recovery():
    config = DegreeConfiguration({1: 500, 3: 500}, {3: 2}, rho=0.0)
    report = compute_criticality(config)
    assert predict_small_outbreak_probability(
        report, config, corrected=True
    ) == predict_small_outbreak_probability(report, config)


def test_psi_trivial_cases():
    config = near_critical()
    report = compute_criticality(config)
    assert psi_n(0, report, config) == 0.0
    no_recovery = DegreeConfiguration({1: 500, 3: 500}, {3: 2}, rho=0.0)
    assert psi_n(5, compute_criticality(no_recovery), no_recovery) == 0.0


def test_psi_closed_form_linear_exponent():
    # beta = rho gives exp(c (x - 1/2)) with c = k alpha kappa / pi = 1
    config = DegreeConfiguration({1: 500, 3: 500}, {3: 2}, beta=1.0, rho=1.0)
    report = replace(compute_criticality(near_critical()), alpha=0.1, kappa=1.0, pi=0.5)
    assert psi_n(5, report, config) == pytest.approx(math.log(2 * math.sinh(0.5)), rel=1e-9)


def test_psi_matches_monte_carlo(rng):
    config = near_critical()
    report = compute_criticality(config)
    k = 3
    c = k * report.alpha * report.kappa / report.pi
    x = rng.random(10**6)
    samples = np.exp(c * (x ** (config.beta / config.rho) - config.rho / (config.beta + config.rho)))
    estimate = samples.mean()
    stderr = samples.std(ddof=1) / math.sqrt(samples.size)
    value = math.exp(psi_n(k, report, config))
    assert abs(value - estimate) < 4 * stderr


@pytest.mark.parametrize("k", [1, 2, 5, 20])
def test_psi_is_non_negative(k):
    config = near_critical()
    assert psi_n(k, compute_criticality(config), config) >= 0.0


def test_predict_report_fields():
    report = predict(near_critical())
    d = report.to_dict()
    assert d["regime"] == "NuZero"
    assert d["p_small"] is not None and d["p_small_corrected"] is not None
    report = predict(near_critical(x_I_vertices=100))
    assert report.p_small is None


def test_gnp_corollary_small_outbreak_probability():
    n, beta, rho, n_I = 10**6, 1.0, 1.0, 20
    lam = (beta + rho) / beta
    p = lam * 1.05 / n
    pred = gnp_corollary(n, p, beta, rho, n_I)
    assert pred.eta == pytest.approx(0.05)
    assert pred.p_small == pytest.approx(math.exp(-(1 + 1 / lam) * pred.gamma * n_I))
    assert pred.regime is Regime.NU_ZERO
    assert pred.predicted_size == pytest.approx(2 * n * pred.gamma)


def test_gnp_corollary_subcritical():
    with pytest.raises(Subcritical):
        gnp_corollary(1000, 1.0 / 1000, 1.0, 1.0, 1)


@pytest.mark.parametrize("k", [2, 5, 20])
@pytest.mark.parametrize("beta,rho", [(1.0, 1.0), (1.0, 0.0), (2.0, 1.0)])
def test_y_moments_match_law(k, beta, rho):
    pmf = y_pmf(k, beta, rho)
    support = np.arange(k)
    assert pmf.sum() == pytest.approx(1.0)
    mean, second = y_moments(k, beta, rho)
    assert np.sum(support * pmf) == pytest.approx(mean)
    assert np.sum(support**2 * pmf) == pytest.approx(second)
    if rho > 0:
        assert np.allclose(pmf, stats.betabinom.pmf(support, k - 1, 1.0, rho / beta))


def test_validate_flags_degree_zero_graph():
    diags = {d.code: d for d in validate_assumptions(DegreeConfiguration({0: 10}))}
    assert diags["D6"].status is DiagnosticStatus.FAIL
    assert diags["D4"].status is DiagnosticStatus.FAIL


def test_validate_flags_critical_two_regular():
    diags = {d.code: d for d in validate_assumptions(DegreeConfiguration({2: 10}, {2: 1}, rho=0.0))}
    assert diags["D4"].status is DiagnosticStatus.FAIL


def test_validate_without_susceptibles_stops_early():
    diags = validate_assumptions(DegreeConfiguration({}, {2: 3}))
    assert [d.code for d in diags] == ["D7"]
    assert diags[0].status is DiagnosticStatus.FAIL


def test_validate_poisson_sample_passes(rng):
    degrees = sample_poisson_degrees(10**6, 2.02, rng)
    states = np.zeros(degrees.size, dtype=np.int8)
    states[:200] = 1
    config = configuration_from_states(degrees, states, 1.0, 1.0)
    diags = validate_assumptions(config)
    failing = [d.code for d in diags if d.status is not DiagnosticStatus.PASS]
    assert failing == []
