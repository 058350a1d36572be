"""
Static quantities of the SIR model on a configuration-model graph.

Everything here is a pure function of a :class:`~limiar.models.DegreeConfiguration`
(or of an exact degree law): empirical moments of the susceptible degree
distribution, the basic reproduction number, the criticality measure alpha,
the regime of the initial infective mass, assumption diagnostics, and the
closed-form predictions for the final size and for the probability that the
outbreak stays small.

Notation follows the code rather than the mathematics: ``lam``, ``lam2`` and
``lam3`` are the first three factorial moments of the susceptible degree,
``x_I0`` is the total degree of the initial infectives.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping

import numpy as np
from scipy import integrate, stats

from ..errors import (
    DegenerateMoments,
    NoSusceptibles,
    QuadratureFailure,
    RegimeMismatch,
    Subcritical,
    ZeroTotalDegree,
)
from ..log import get_logger
from ..models import DegreeConfiguration, Diagnostic, DiagnosticStatus, PredictionReport

logger = get_logger(__name__)

PSI_TOLERANCE = 1e-10
LOG_SPACE_RATIO = 1e-6


class Regime(str, Enum):
    """Which limit law of the final size applies."""

    NU_ZERO = "NuZero"
    NU_FINITE = "NuFinite"
    NU_INFINITE = "NuInfinite"


@dataclass(frozen=True)
class RegimeThresholds:
    """Finite-n cut-offs on ``nu_proxy`` separating the three regimes."""

    nu_zero_below: float = 0.01
    nu_infinite_above: float = 100.0

    def __post_init__(self) -> None:
        if not 0 < self.nu_zero_below < self.nu_infinite_above:
            raise ValueError("need 0 < nu_zero_below < nu_infinite_above")

    def classify(self, nu_proxy: float) -> Regime:
        if nu_proxy < self.nu_zero_below:
            return Regime.NU_ZERO
        if nu_proxy > self.nu_infinite_above:
            return Regime.NU_INFINITE
        return Regime.NU_FINITE


@dataclass(frozen=True)
class MomentSummary:
    """Empirical moments of the susceptible degree distribution.

    Attributes:
        lam: E D_S.
        lam2: E D_S (D_S - 1).
        lam3: E D_S (D_S - 1)(D_S - 2).
        mean_total_degree: Sum k n_k / n over all vertices.
        third_moment_bound: E D_S^3.
    """

    lam: float
    lam2: float
    lam3: float
    mean_total_degree: float
    third_moment_bound: float


@dataclass(frozen=True)
class CriticalityReport:
    """Criticality constants of one configuration.

    ``nu`` is the value used in ``f``: 0 in the NuZero regime, ``nu_proxy``
    in the NuFinite regime and unused (``inf``) in the NuInfinite regime.
    """

    r0: float
    alpha: float
    alpha_bar: float
    nu_proxy: float
    nu: float
    pi: float
    xi: float
    sigma2: float
    kappa: float
    regime: Regime
    moments: MomentSummary

    def f(self, t: float | np.ndarray) -> float | np.ndarray:
        """Limit of the rescaled infective half-edge count."""
        half_lam3 = 0.5 * self.moments.lam3
        if self.regime is Regime.NU_INFINITE:
            return 1.0 - half_lam3 * np.square(t)
        return self.nu + t - half_lam3 * np.square(t)


def pi_n(beta: float, rho: float) -> float:
    """Probability that a free infective half-edge pairs before its vertex recovers."""
    return beta / (beta + rho)


def moments(config: DegreeConfiguration) -> MomentSummary:
    """Moments of the empirical susceptible degree law ``n_{S,k} / n_S``.

    Raises:
        NoSusceptibles: If there are no susceptible vertices.
    """
    n_S = config.n_S
    if n_S == 0:
        raise NoSusceptibles("no susceptible vertices")
    k = np.array(list(config.n_S_by_degree), dtype=float)
    c = np.array(list(config.n_S_by_degree.values()), dtype=float)
    return MomentSummary(
        lam=float(np.sum(k * c) / n_S),
        lam2=float(np.sum(k * (k - 1) * c) / n_S),
        lam3=float(np.sum(k * (k - 1) * (k - 2) * c) / n_S),
        mean_total_degree=config.total_degree / config.n,
        third_moment_bound=float(np.sum(k**3 * c) / n_S),
    )


def poisson_pmf(mean: float, tail: float = 1e-12) -> Dict[int, float]:
    """Poisson(mean) probabilities truncated once the upper tail drops below ``tail``."""
    k_max = int(stats.poisson.isf(tail, mean)) + 1
    ks = np.arange(k_max + 1)
    return dict(zip(ks.tolist(), stats.poisson.pmf(ks, mean).tolist()))


def moments_from_pmf(pmf: Mapping[int, float]) -> MomentSummary:
    """Moments of an exact degree law (everyone susceptible)."""
    k = np.array(list(pmf), dtype=float)
    p = np.array(list(pmf.values()), dtype=float)
    p = p / p.sum()
    lam = float(np.sum(k * p))
    return MomentSummary(
        lam=lam,
        lam2=float(np.sum(k * (k - 1) * p)),
        lam3=float(np.sum(k * (k - 1) * (k - 2) * p)),
        mean_total_degree=lam,
        third_moment_bound=float(np.sum(k**3 * p)),
    )


def alpha_from_moments(
    m: MomentSummary, beta: float, rho: float, total_over_susceptible: float | None = None
) -> float:
    """Criticality measure from moments.

    Args:
        m: Susceptible degree moments.
        beta: Infection rate.
        rho: Recovery rate.
        total_over_susceptible: ``sum_k k n_k / n_S``; defaults to ``lam``
            (no infective or recovered vertices).
    """
    if total_over_susceptible is None:
        total_over_susceptible = m.lam
    return -(1.0 + rho / beta) * total_over_susceptible + m.lam2


def compute_r0(config: DegreeConfiguration) -> float:
    """Basic reproduction number of the configuration.

    Raises:
        ZeroTotalDegree: If the graph has no half-edges.
    """
    total = config.total_degree
    if total == 0:
        raise ZeroTotalDegree("total degree is zero")
    s2 = sum((k - 1) * k * c for k, c in config.n_S_by_degree.items())
    return pi_n(config.beta, config.rho) * s2 / total


def compute_alpha(config: DegreeConfiguration) -> float:
    """Criticality measure alpha_n of the configuration.

    Raises:
        NoSusceptibles: If ``n_S == 0``.
    """
    n_S = config.n_S
    if n_S == 0:
        raise NoSusceptibles("no susceptible vertices")
    s2 = sum(k * (k - 1) * c for k, c in config.n_S_by_degree.items())
    return -(1.0 + config.rho / config.beta) * config.total_degree / n_S + s2 / n_S


def alpha_via_r0(config: DegreeConfiguration) -> float:
    """Alpha recomputed from R0; equals :func:`compute_alpha` up to rounding."""
    r0 = compute_r0(config)
    s2 = sum((k - 1) * k * c for k, c in config.n_S_by_degree.items())
    if r0 == 0:
        return -(1.0 + config.rho / config.beta) * config.total_degree / config.n_S
    return (r0 - 1.0) / r0 * s2 / config.n_S


def zeta_variance(m: MomentSummary) -> float:
    """Variance constant sigma^2 of the red-walk increments."""
    return 2.0 * m.lam * m.lam3 / (m.lam2 * (m.lam2 + m.lam))


def compute_criticality(
    config: DegreeConfiguration, thresholds: RegimeThresholds | None = None
) -> CriticalityReport:
    """Criticality constants, regime and the root of ``f``.

    Raises:
        Subcritical: If alpha <= 0.
        DegenerateMoments: If lambda_2 or lambda_3 is zero.
    """
    thresholds = thresholds or RegimeThresholds()
    alpha = compute_alpha(config)
    if alpha <= 0:
        raise Subcritical(f"alpha = {alpha:.6g} is not positive")
    m = moments(config)
    if m.lam2 == 0 or m.lam3 == 0:
        raise DegenerateMoments(f"lambda_2 = {m.lam2}, lambda_3 = {m.lam3}")
    n_S = config.n_S
    x_I0 = config.x_I0
    nu_proxy = x_I0 / (n_S * alpha**2)
    regime = thresholds.classify(nu_proxy)

    if regime is Regime.NU_INFINITE:
        alpha_bar = math.sqrt(x_I0 / config.n)
        nu = math.inf
        xi = math.sqrt(2.0 / m.lam3)
    else:
        alpha_bar = alpha
        nu = 0.0 if regime is Regime.NU_ZERO else nu_proxy
        xi = (1.0 + math.sqrt(1.0 + 2.0 * nu * m.lam3)) / m.lam3

    recovered_term = config.x_R0 / n_S
    kappa = (m.lam2 + m.lam + recovered_term) / (m.lam2 * m.lam3)
    return CriticalityReport(
        r0=compute_r0(config),
        alpha=alpha,
        alpha_bar=alpha_bar,
        nu_proxy=nu_proxy,
        nu=nu,
        pi=pi_n(config.beta, config.rho),
        xi=xi,
        sigma2=zeta_variance(m),
        kappa=kappa,
        regime=regime,
        moments=m,
    )


def predict_final_size(
    report: CriticalityReport, config: DegreeConfiguration
) -> tuple[float, Dict[int, float]]:
    """Predicted size of a large outbreak and its size-biased degree profile.

    Returns:
        tuple: ``(predicted_size, {k: k p_k / lambda})``.
    """
    if report.alpha <= 0:
        raise Subcritical("alpha must be positive")
    m = report.moments
    n_S = config.n_S
    if report.regime is Regime.NU_ZERO:
        size = 2.0 * m.lam / m.lam3 * n_S * report.alpha
    elif report.regime is Regime.NU_FINITE:
        size = m.lam * report.xi * n_S * report.alpha
    else:
        size = math.sqrt(2.0) * m.lam * math.sqrt(n_S * config.x_I0) / math.sqrt(m.lam3)
    profile = {k: k * c / n_S / m.lam for k, c in config.n_S_by_degree.items() if k > 0}
    return size, profile


def psi_n(k: int, report: CriticalityReport, config: DegreeConfiguration) -> float:
    """Correction term for an infective vertex of degree ``k``.

    Evaluates ``log int_0^1 exp(k c (x^(beta/rho) - rho/(beta+rho))) dx`` with
    ``c = alpha kappa / pi``; zero when ``rho == 0`` or ``k == 0``.

    Raises:
        QuadratureFailure: If the adaptive quadrature misses the tolerance.
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    beta, rho = config.beta, config.rho
    if rho == 0 or k == 0:
        return 0.0
    c = k * report.alpha * report.kappa / report.pi
    shift = rho / (beta + rho)
    if rho < LOG_SPACE_RATIO * beta:
        log_exponent = math.log(beta) - math.log(rho)

        def power(x: float) -> float:
            return math.exp(math.exp(log_exponent) * math.log(x)) if x > 0 else 0.0

    else:
        exponent = beta / rho

        def power(x: float) -> float:
            return x**exponent

    def integrand(x: float) -> float:
        return math.exp(c * (power(x) - shift))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(
                integrand, 0.0, 1.0, epsabs=PSI_TOLERANCE, epsrel=PSI_TOLERANCE, limit=200
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(f"psi_n({k}) did not converge: {exc}") from exc
    # psi is a log, so the tolerance is relative once the integral exceeds 1
    if abserr > PSI_TOLERANCE * max(1.0, value) or not value > 0:
        raise QuadratureFailure(f"psi_n({k}) error estimate {abserr:.3g} above tolerance")
    return max(math.log(value), 0.0)


def predict_small_outbreak_probability(
    report: CriticalityReport, config: DegreeConfiguration, corrected: bool = False
) -> float:
    """Asymptotic probability that the outbreak stays small.

    Raises:
        RegimeMismatch: Outside the NuZero regime.
    """
    if report.regime is not Regime.NU_ZERO:
        raise RegimeMismatch(f"small-outbreak probability needs NuZero, got {report.regime.value}")
    exponent = -report.kappa * report.alpha * config.x_I0
    if corrected:
        exponent += sum(c * psi_n(k, report, config) for k, c in config.n_I_by_degree.items())
    return min(1.0, max(0.0, math.exp(exponent)))


def predict(
    config: DegreeConfiguration, thresholds: RegimeThresholds | None = None
) -> PredictionReport:
    """Flat prediction report for one configuration."""
    report = compute_criticality(config, thresholds)
    size, _ = predict_final_size(report, config)
    p_small = p_corrected = None
    if report.regime is Regime.NU_ZERO:
        p_small = predict_small_outbreak_probability(report, config)
        p_corrected = predict_small_outbreak_probability(report, config, corrected=True)
    return PredictionReport(
        r0=report.r0,
        alpha=report.alpha,
        alpha_bar=report.alpha_bar,
        nu_proxy=report.nu_proxy,
        regime=report.regime.value,
        xi=report.xi,
        sigma2=report.sigma2,
        kappa=report.kappa,
        predicted_size=size,
        p_small=p_small,
        p_small_corrected=p_corrected,
    )


@dataclass(frozen=True)
class GnpPrediction:
    """Predictions of the G(n, p) corollary."""

    lam: float
    eta: float
    gamma: float
    mu: float
    regime: Regime
    predicted_size: float
    p_small: float


def gnp_corollary(
    n: int,
    p: float,
    beta: float,
    rho: float,
    n_I: int,
    thresholds: RegimeThresholds | None = None,
) -> GnpPrediction:
    """Final-size and takeoff predictions for G(n, p) with random seeds.

    Uses ``lambda = (beta + rho) / beta`` so that ``p = lambda (1 + eta) / n``.
    For G(n, m) pass ``p = 2 m / (n (n - 1))``.

    Raises:
        Subcritical: If gamma_n <= 0.
    """
    thresholds = thresholds or RegimeThresholds()
    lam = (beta + rho) / beta
    eta = p * n / lam - 1.0
    gamma = 1.0 - (beta + rho) / (lam * beta) + eta - (1.0 + eta) * n_I / n
    if gamma <= 0:
        raise Subcritical(f"gamma_n = {gamma:.6g} is not positive")
    mu = n_I / (n * gamma**2)
    # nu = mu / lambda^3 for Poisson degrees
    regime = thresholds.classify(mu / lam**3)
    n_S = n - n_I
    if regime is Regime.NU_ZERO:
        size = 2.0 * n * gamma
    elif regime is Regime.NU_FINITE:
        size = (1.0 + math.sqrt(1.0 + 2.0 * mu)) * n * gamma
    else:
        size = math.sqrt(2.0 * n_S * n_I)
    p_small = math.exp(-(1.0 + 1.0 / lam) * gamma * n_I)
    return GnpPrediction(lam, eta, gamma, mu, regime, size, p_small)


def y_moments(k: int, beta: float, rho: float) -> tuple[float, float]:
    """Exact ``(E Y(k), E Y(k)^2)`` for a newly infected degree-``k`` vertex."""
    if k < 1:
        raise ValueError("k must be at least 1")
    pi = pi_n(beta, rho)
    mean = (k - 1) * pi
    second = ((k - 1) * (2 * k - 3) * pi**2 + (k - 1) * pi) / (1.0 + pi)
    return mean, second


def y_pmf(k: int, beta: float, rho: float) -> np.ndarray:
    """Exact law of Y(k) on ``0..k-1`` (beta-binomial(k-1, 1, rho/beta))."""
    if k < 1:
        raise ValueError("k must be at least 1")
    support = np.arange(k)
    if rho == 0:
        pmf = np.zeros(k)
        pmf[-1] = 1.0
        return pmf
    return stats.betabinom.pmf(support, k - 1, 1.0, rho / beta)


@dataclass(frozen=True)
class AssumptionLimits:
    """Thresholds of the finite-n assumption proxies."""

    max_third_moment: float = 1e3
    max_second_moment: float = 1e3
    max_alpha: float = 0.5
    min_window: float = 1.0
    max_infective_fraction: float = 0.05
    max_dI_share: float = 0.1
    min_susceptible_fraction: float = 0.5
    max_dS_ratio: float = 1.0
    nu_zero_below: float = 0.01


def _check(
    code: str,
    name: str,
    value: float,
    threshold: float,
    ok: bool,
    fatal: bool = False,
    message: str = "",
) -> Diagnostic:
    if ok:
        status = DiagnosticStatus.PASS
    else:
        status = DiagnosticStatus.FAIL if fatal else DiagnosticStatus.WARN
    return Diagnostic(code, name, float(value), float(threshold), status, message)


def validate_assumptions(
    config: DegreeConfiguration, limits: AssumptionLimits | None = None
) -> List[Diagnostic]:
    """Finite-n proxies of the model assumptions with pass/warn/fail flags.

    ``FAIL`` marks a violation under which the predictions are undefined
    (no susceptibles, alpha <= 0, all susceptible degrees <= 2); every other
    violation is a ``WARN``.
    """
    limits = limits or AssumptionLimits()
    n = config.n
    n_S = config.n_S
    diagnostics: List[Diagnostic] = [
        _check(
            "D7",
            "susceptible fraction n_S/n",
            n_S / n,
            limits.min_susceptible_fraction,
            n_S / n >= limits.min_susceptible_fraction,
            fatal=n_S == 0,
            message="no susceptible vertices" if n_S == 0 else "",
        )
    ]
    if n_S == 0:
        logger.warning("assumption D7 failed: no susceptible vertices")
        return diagnostics

    m = moments(config)
    second = sum(k * k * c for k, c in config.n_by_degree.items()) / n
    alpha = compute_alpha(config)
    window = n_S * max(alpha, 0.0) ** 3
    x_I0 = config.x_I0
    share = config.d_I_max / x_I0 if x_I0 else 0.0
    # the d_I,max condition only matters when nu > 0
    nu_zero = alpha > 0 and x_I0 / (n_S * alpha**2) < limits.nu_zero_below
    p012 = sum(config.n_S_by_degree.get(k, 0) for k in (0, 1, 2)) / n_S
    ratio = config.d_S_max / n_S ** (1.0 / 3.0)

    diagnostics += [
        _check(
            "D2",
            "third moment sum k^3 n_Sk / n_S",
            m.third_moment_bound,
            limits.max_third_moment,
            m.third_moment_bound <= limits.max_third_moment,
        ),
        _check(
            "D3",
            "second moment sum k^2 n_k / n",
            second,
            limits.max_second_moment,
            second <= limits.max_second_moment,
        ),
        _check(
            "D4",
            "alpha > 0",
            alpha,
            0.0,
            alpha > 0,
            fatal=True,
            message="" if alpha > 0 else "configuration is not supercritical",
        ),
        _check(
            "D4-small",
            "alpha small",
            alpha,
            limits.max_alpha,
            alpha <= limits.max_alpha,
            message="" if alpha <= limits.max_alpha else "far from the critical point",
        ),
        _check(
            "D4-window",
            "n_S alpha^3",
            window,
            limits.min_window,
            window >= limits.min_window,
            message="" if window >= limits.min_window else "inside the critical window",
        ),
        _check(
            "D5",
            "X_I0 / n",
            x_I0 / n,
            limits.max_infective_fraction,
            0 < x_I0 / n <= limits.max_infective_fraction,
            message="no initial infective half-edges" if x_I0 == 0 else "",
        ),
        _check(
            "D5-dImax",
            "d_I,max / X_I0",
            share,
            limits.max_dI_share,
            share <= limits.max_dI_share or x_I0 == 0 or nu_zero,
        ),
        _check(
            "D6",
            "p0 + p1 + p2 < 1",
            p012,
            1.0,
            p012 < 1.0,
            fatal=True,
            message="" if p012 < 1.0 else "susceptible degrees never exceed 2",
        ),
        _check(
            "RdSmax",
            "d_S,max / n_S^(1/3)",
            ratio,
            limits.max_dS_ratio,
            ratio <= limits.max_dS_ratio,
        ),
    ]
    for d in diagnostics:
        if d.status is not DiagnosticStatus.PASS:
            logger.warning(
                "assumption %s (%s) %s: value %.6g", d.code, d.name, d.status.value, d.value
            )
    return diagnostics
