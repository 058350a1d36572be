import math

import numpy as np
import pytest

from limiar.errors import ConfigError
from limiar.models import (
    DegreeConfiguration,
    EpidemicOutcome,
    Estimate,
    Multigraph,
    RunConfig,
)


def test_configuration_totals():
    c = DegreeConfiguration({1: 4, 3: 2}, {2: 1}, {4: 1}, beta=2.0, rho=1.0)
    assert c.n == 8
    assert c.n_S == 6 and c.n_I == 1 and c.n_R == 1
    assert c.x_S0 == 10 and c.x_I0 == 2 and c.x_R0 == 4
    assert c.total_degree == 16
    assert c.n_by_degree == {1: 4, 2: 1, 3: 2, 4: 1}
    assert c.d_I_max == 2 and c.d_S_max == 3


def test_configuration_dict_uses_string_keys_and_reloads():
    c = DegreeConfiguration({1: 2, 3: 2}, {2: 1}, beta=1.0, rho=0.5)
    d = c.to_dict()
    assert d["S"] == {"1": 2, "3": 2}
    assert DegreeConfiguration.from_dict(d) == c


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_S_by_degree": {1: 3}},
        {"n_S_by_degree": {2: 2}, "beta": 0.0},
        {"n_S_by_degree": {2: 2}, "rho": -1.0},
        {"n_S_by_degree": {2: -1}},
        {"n_S_by_degree": {}},
        {"n_S_by_degree": {2: 1.5}},
    ],
)
def test_configuration_rejects_bad_input(kwargs):
    with pytest.raises(ConfigError):
        DegreeConfiguration(**kwargs)


def test_multigraph_half_edge_views_are_consistent():
    g = Multigraph.from_edges(4, [(0, 1), (1, 1), (1, 2), (0, 1), (2, 3)])
    assert g.degrees.tolist() == [2, 5, 2, 1]
    assert g.half_edge_offsets.tolist() == [0, 2, 7, 9, 10]
    partner = g.partner
    assert np.array_equal(partner[partner], np.arange(2 * g.m))
    # the neighbour of a half-edge owns its partner
    assert np.array_equal(g.owner[partner], g.neighbors)
    with pytest.raises(ValueError):
        g.degrees[0] = 7


def test_multigraph_rejects_out_of_range_endpoint():
    with pytest.raises(ValueError):
        Multigraph.from_edges(2, [(0, 2)])


def test_outcome_sizes_must_add_up():
    with pytest.raises(ValueError):
        EpidemicOutcome(final_size=3, final_size_by_degree={1: 1})


def test_estimate_from_samples():
    e = Estimate.from_samples([1.0, 2.0, 3.0, 4.0])
    assert e.mean == 2.5
    assert math.isclose(e.stderr, np.std([1, 2, 3, 4], ddof=1) / 2)
    assert math.isnan(Estimate.from_samples([]).mean)


def test_run_config_defaults_and_errors():
    rc = RunConfig.from_dict({"model": {"poisson": {"n": 100, "mean": 2.5}}})
    assert rc.model.poisson == (100, 2.5)
    assert rc.experiment.engine == "pairing"
    assert rc.seed == 0 and rc.beta == 1.0

    with pytest.raises(ConfigError):
        RunConfig.from_dict({"model": {"poisson": {"n": 10, "mean": 2}}, "extra": 1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"model": {}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict(
            {"model": {"gnp": {"n": 10, "p": 0.1}, "gnm": {"n": 10, "m": 3}}}
        )
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"model": {"gnp": {"n": 10, "p": 0.1}}, "rng": {"seed": -1}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"model": {"gnp": "oops"}})
