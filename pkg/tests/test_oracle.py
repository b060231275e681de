from fractions import Fraction

import pytest

from models.alignment import GapEstimates
from models.oracle import BehindDistribution, OracleConfig
from services.core import chain_instance, periodic_instance
from services.oracle import (
    as_fraction,
    catalan,
    check_pk_bound,
    check_window_zero,
    d_k,
    enumerate_outcomes,
    sup_pk,
)
from services.validation import check_catalan, check_oracle_agreement, check_pk_bounds
from utils.errors import InstanceTooLarge, ParameterError


def estimates(a):
    return GapEstimates(values=tuple(float(v) for v in a))


def test_as_fraction_uses_the_decimal_value():
    assert as_fraction(0.001) == Fraction(1, 1000)
    assert as_fraction("1/3") == Fraction(1, 3)
    assert as_fraction(Fraction(2, 7)) == Fraction(2, 7)


def test_single_run_is_always_exact(chain_cfg):
    dist = enumerate_outcomes([500], estimates([500]), 0.3, chain_cfg, OracleConfig())
    assert dist.probs == {"exact": Fraction(1)}
    assert dist.p_k[0] == 1
    assert dist.p_k[1] == 0


def test_chain_behind_probabilities_are_exact(chain_cfg):
    a = list(chain_instance(10_000, 100, 3).gaps)
    b = estimates(a)
    d = Fraction(1, 10)
    dist = enumerate_outcomes(a, b, d, chain_cfg, OracleConfig())
    # losing exactly the first one leaves the walk one step behind
    assert dist.prob("behind:1") == d * (1 - d)
    assert dist.prob("behind:2") == d**2 * (1 - d)
    assert sum(dist.probs.values()) == 1
    assert dist.prob("ahead:1") == 0


def test_chain_p_k_is_tail_monotone(chain, chain_cfg):
    a, b = chain
    dist = enumerate_outcomes(a, b, 0.2, chain_cfg, OracleConfig())
    values = [dist.p_k[k] for k in sorted(dist.p_k)]
    assert values == sorted(values, reverse=True)
    assert dist.p_k[1] <= dist.behind_at_least(1)


def test_enumeration_limits(chain_cfg):
    with pytest.raises(InstanceTooLarge):
        enumerate_outcomes([100] * 5, estimates([100] * 5), 0.1, chain_cfg, OracleConfig(max_m=4))
    with pytest.raises(ParameterError):
        enumerate_outcomes([], estimates([]), 0.1, chain_cfg, OracleConfig())
    with pytest.raises(ParameterError):
        enumerate_outcomes([100], estimates([100]), 1.0, chain_cfg, OracleConfig())


def test_tiny_delta_is_almost_surely_exact(chain, chain_cfg):
    a, b = chain
    dist = enumerate_outcomes(a, b, 1e-9, chain_cfg, OracleConfig())
    assert dist.prob("exact") > 1 - 1e-6


def test_window_caps_how_far_behind_counts(chain, chain_cfg):
    a, b = chain
    dist = enumerate_outcomes(a, b, 0.2, chain_cfg, OracleConfig(k_window=2))
    assert dist.k_window == 2
    assert check_window_zero(dist)
    assert dist.p_k[1] > 0


def test_distribution_must_sum_to_one():
    with pytest.raises(ValueError):
        BehindDistribution(m=1, k_window=1, probs={"exact": Fraction(1, 2)}, p_k={0: Fraction(1, 2)})


@pytest.mark.parametrize("k, value", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 14)])
def test_catalan(k, value):
    assert catalan(k) == value


@pytest.mark.parametrize("k, value", [(0, 1), (1, 100), (2, 2_000_000)])
def test_d_k(k, value):
    assert d_k(k) == value


def test_catalan_range():
    with pytest.raises(ParameterError):
        catalan(-1)
    with pytest.raises(ParameterError):
        d_k(33)


def test_catalan_suite_passes():
    assert check_catalan().passed


def test_pk_bound_on_the_chain(chain, chain_cfg):
    a, b = chain
    report = check_pk_bound(a, b, 1e-7, chain_cfg, OracleConfig())
    assert report.bound_claimed
    assert report.passed
    assert report.rows[0].k == 0
    # the chain sits far below the bound
    assert report.rows[1].p_k < report.rows[1].bound / 10


def test_pk_bound_single_run(chain_cfg):
    report = check_pk_bound([200], estimates([200]), 0.01, chain_cfg, OracleConfig())
    assert not report.bound_claimed
    assert report.passed
    assert all(row.p_k == 0 for row in report.rows if row.k >= 1)


def test_sup_pk_covers_every_instance(chain, chain_cfg):
    a, b = chain
    periodic = list(periodic_instance([100, 300], 3, 5_000).gaps)
    family = [(a, b), (periodic, estimates(periodic))]
    best = sup_pk(family, 0.05, chain_cfg, OracleConfig())
    for inst_a, inst_b in family:
        dist = enumerate_outcomes(inst_a, inst_b, 0.05, chain_cfg, OracleConfig())
        assert all(best[k] >= p for k, p in dist.p_k.items())


def test_pk_bound_suite_passes():
    assert check_pk_bounds(delta=1e-7).passed


def test_monte_carlo_agrees_with_enumeration():
    result = check_oracle_agreement(runs=20_000, delta=0.2, seed=8)
    assert result.passed, result.detail
