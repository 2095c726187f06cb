"""Finite-statistics sampling and estimator tests."""

import numpy as np
import pytest

from qss3.qss import share_entangled, witness_operator, witness_setting_probabilities
from qss3.qcore import expectation
from qss3.shots import (
    CountTable,
    Estimate,
    estimate_probabilities,
    expectation_from_probs,
    sample,
    witness_from_expectations,
)


# ---------------------------------------------------------------- containers


def test_estimate_validation():
    Estimate(0.3)
    with pytest.raises(ValueError):
        Estimate(0.3, sigma=-0.1)
    with pytest.raises(ValueError):
        Estimate(float("nan"))


def test_count_table_validation():
    CountTable(("a", "b"), (1, 2), seed=0)
    with pytest.raises(ValueError):
        CountTable(("a", "b"), (1,), seed=0)
    with pytest.raises(ValueError):
        CountTable(("a", "a"), (1, 2), seed=0)
    with pytest.raises(ValueError):
        CountTable(("a", "b"), (1, -2), seed=0)


# ---------------------------------------------------------------- sampling


def test_sample_deterministic_distribution():
    table = sample([1.0, 0.0], 5000, seed=3)
    assert table.counts == (5000, 0)
    assert table.total == 5000


def test_sample_agrees_with_binomial_scale():
    n = 10**6
    table = sample([0.5, 0.5], n, seed=4)
    sigma = np.sqrt(0.25 * n)
    assert abs(table.counts[0] - n / 2) < 5 * sigma


def test_sample_is_seed_stable():
    a = sample([0.2, 0.3, 0.5], 999, seed=11)
    b = sample([0.2, 0.3, 0.5], 999, seed=11)
    c = sample([0.2, 0.3, 0.5], 999, seed=12)
    assert a.counts == b.counts
    assert a.counts != c.counts


def test_sample_validation():
    with pytest.raises(ValueError):
        sample([0.6, 0.6], 10, seed=0)
    with pytest.raises(ValueError):
        sample([0.5, 0.5], 0, seed=0)
    with pytest.raises(ValueError):
        sample([-0.1, 1.1], 10, seed=0)


def test_sample_custom_labels():
    table = sample([0.5, 0.5], 10, seed=0, labels=("up", "dn"))
    assert table.outcome_labels == ("up", "dn")


# ---------------------------------------------------------------- estimation


def test_estimate_probabilities_reported_counts():
    table = CountTable(("a", "b", "c", "d"), (40000, 10000, 11000, 40000), seed=None)
    est = estimate_probabilities(table)
    values = [e.value for e in est]
    assert values == pytest.approx([0.396, 0.099, 0.109, 0.396], abs=1e-3)
    for e in est:
        assert e.sigma == pytest.approx(np.sqrt(e.value * (1 - e.value) / table.total), abs=1e-12)


def test_estimate_probabilities_certain_outcome():
    est = estimate_probabilities(CountTable(("a", "b"), (500, 0), seed=None))
    assert est[0].value == 1.0 and est[0].sigma == 0.0
    assert est[1].value == 0.0 and est[1].sigma == 0.0


def test_estimate_probabilities_uniform_counts():
    est = estimate_probabilities(CountTable(("a", "b", "c", "d"), (1, 1, 1, 1), seed=None))
    assert all(e.value == pytest.approx(0.25, abs=1e-12) for e in est)
    sigmas = {round(e.sigma, 14) for e in est}
    assert len(sigmas) == 1


def test_estimate_probabilities_rejects_empty():
    with pytest.raises(ValueError):
        estimate_probabilities(CountTable(("a", "b"), (0, 0), seed=None))


# ---------------------------------------------------------------- correlators


def test_expectation_from_reported_rows():
    zz = expectation_from_probs([0.40, 0.10, 0.11, 0.40], "ZZ")
    assert zz.value == pytest.approx(0.59, abs=1e-12)
    yy = expectation_from_probs([0.03, 0.41, 0.52, 0.05], "YY")
    assert yy.value == pytest.approx(-0.85, abs=1e-12)


def test_expectation_accepts_two_decimal_rows():
    # published tables round to two decimals, so rows can sum to 1.01 or 1.02
    expectation_from_probs([0.40, 0.11, 0.12, 0.39], "XX")
    with pytest.raises(ValueError):
        expectation_from_probs([0.40, 0.40, 0.30, 0.10], "XX")


def test_expectation_uniform_is_zero():
    e = expectation_from_probs([0.25, 0.25, 0.25, 0.25], "XX")
    assert e.value == pytest.approx(0.0, abs=1e-12)


def test_expectation_validation():
    with pytest.raises(ValueError):
        expectation_from_probs([0.5, 0.5], "ZZ")
    with pytest.raises(ValueError):
        expectation_from_probs([0.25, 0.25, 0.25, 0.25], "XY")
    with pytest.raises(ValueError):
        expectation_from_probs([1.2, -0.2, 0.0, 0.0], "ZZ")


def test_expectation_propagates_sigma():
    est = [Estimate(0.25, 0.01) for _ in range(4)]
    e = expectation_from_probs(est, "ZZ")
    assert e.sigma == pytest.approx(0.02, abs=1e-12)


# ---------------------------------------------------------------- witness


def test_witness_reported_point():
    w = witness_from_expectations(0.59, 0.56, -0.84)
    assert w.value == -0.2475
    assert w.sigma == 0.0


def test_witness_extremes():
    assert witness_from_expectations(1.0, 1.0, -1.0).value == pytest.approx(-0.5, abs=1e-12)
    assert witness_from_expectations(0.0, 0.0, 0.0).value == pytest.approx(0.25, abs=1e-12)


def test_witness_validation():
    with pytest.raises(ValueError):
        witness_from_expectations(1.5, 0.0, 0.0)


def test_witness_sigma_quadrature():
    w = witness_from_expectations(Estimate(0.5, 0.04), Estimate(0.5, 0.03), Estimate(-0.5, 0.0))
    assert w.sigma == pytest.approx(0.05 / 4, abs=1e-12)


# ---------------------------------------------------------------- consistency


@pytest.mark.parametrize("noise", [0.0, 0.3])
def test_pipeline_matches_operator_mean(noise):
    rho = share_entangled(noise=noise).rho
    probs = witness_setting_probabilities(rho)
    zz = expectation_from_probs(probs["ZZ"], "ZZ")
    xx = expectation_from_probs(probs["XX"], "XX")
    yy = expectation_from_probs(probs["YY"], "YY")
    w = witness_from_expectations(zz, xx, yy)
    assert w.value == pytest.approx(expectation(rho, witness_operator()), abs=1e-12)


def test_sampled_pipeline_converges():
    rho = share_entangled(noise=0.2).rho
    probs = witness_setting_probabilities(rho)
    exact = expectation(rho, witness_operator())
    for trial in range(10):
        est = {}
        for k, p in probs.items():
            table = sample(p, 10**5, seed=500 + 3 * trial + len(est))
            est[k] = expectation_from_probs(estimate_probabilities(table), k)
        w = witness_from_expectations(est["ZZ"], est["XX"], est["YY"])
        assert w.sigma > 0
        assert abs(w.value - exact) < 4 * w.sigma
