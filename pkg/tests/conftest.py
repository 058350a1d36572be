import numpy as np
import pytest
from scipy import stats

from limiar.models import DegreeConfiguration, Multigraph


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def p3():
    """Path 0 - 1 - 2 with the middle vertex infective."""
    return Multigraph.from_edges(3, [(0, 1), (1, 2)]), np.array([0, 1, 0], dtype=np.int8)


@pytest.fixture
def p3_configuration():
    """Two degree-1 susceptibles and one degree-2 infective."""
    return DegreeConfiguration({1: 2}, {2: 1}, {}, beta=1.0, rho=1.0)


def empirical_law(sizes, support):
    sizes = np.asarray(sizes)
    return {k: float(np.mean(sizes == k)) for k in support}


def assert_law_close(sizes, law, tol=0.02):
    emp = empirical_law(sizes, sorted(set(law) | set(np.unique(sizes).tolist())))
    for k, p in emp.items():
        assert abs(p - law.get(k, 0.0)) < tol, (k, p, law.get(k, 0.0))


def assert_law_fits(sizes, law, p_min=1e-4):
    """Chi-square goodness of fit, pooling cells expected below 5."""
    sizes = np.asarray(sizes)
    support = sorted(set(law) | set(np.unique(sizes).tolist()))
    observed = np.array([np.sum(sizes == k) for k in support], dtype=float)
    expected = np.array([law.get(k, 0.0) for k in support]) * sizes.size
    stray = observed[expected == 0].sum()
    assert stray == 0, f"{int(stray)} outcomes outside the support of {law}"
    keep = expected > 0
    observed, expected = observed[keep], expected[keep]
    small = expected < 5
    if small.any():
        observed = np.append(observed[~small], observed[small].sum())
        expected = np.append(expected[~small], expected[small].sum())
    if observed.size < 2:
        return
    expected *= observed.sum() / expected.sum()
    p = stats.chisquare(observed, expected).pvalue
    assert p > p_min, (p, dict(zip(support, observed)), law)
