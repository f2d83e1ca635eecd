import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from creditnet.core import derived_degrees, derived_strengths
from creditnet.nullmodel import (FitnessSpec, NonGraphicalTargets,
                                 NonpositiveFitness, TargetOutOfRange, Variant,
                                 bicm_from_network, calibrate_z, dcgm_weight,
                                 expected_metrics, fitness_spec_from_sample,
                                 link_probability, random_baseline,
                                 sample_ensemble, solve_bicm)
from conftest import make_network, make_sample
from oracles import bicm_fixed_point, calibrate_z_bisection


def test_link_probability_closed_form():
    spec = FitnessSpec(s=np.array([2.0]), t=np.array([3.0]), z=0.5,
                       variant=Variant.NETWORK_DRIVEN)
    assert link_probability(spec, 0, 0) == pytest.approx(3.0 / 4.0)


def test_link_probability_saturates():
    spec = FitnessSpec(s=np.array([1e8]), t=np.array([1e8]), z=1.0,
                       variant=Variant.NETWORK_DRIVEN)
    assert link_probability(spec, 0, 0) == pytest.approx(1.0, abs=1e-12)


def test_calibrate_z_hits_target(rng):
    s = rng.lognormal(1.0, 1.0, 40)
    t = rng.lognormal(2.0, 0.8, 15)
    target = 120.0
    z = calibrate_z(s, t, target)
    p = z * np.outer(s, t) / (1 + z * np.outer(s, t))
    assert p.sum() == pytest.approx(target, rel=1e-10)


def test_calibrate_z_matches_bisection_oracle(rng):
    s = rng.lognormal(0.0, 1.5, 12)
    t = rng.lognormal(0.0, 1.5, 9)
    z = calibrate_z(s, t, 30.0)
    z_oracle = calibrate_z_bisection(s, t, 30.0)
    assert z == pytest.approx(z_oracle, rel=1e-6)


def test_calibrate_z_target_bounds(rng):
    s = rng.uniform(1, 2, 5)
    t = rng.uniform(1, 2, 4)
    with pytest.raises(TargetOutOfRange):
        calibrate_z(s, t, 0.0)
    with pytest.raises(TargetOutOfRange):
        calibrate_z(s, t, 20.0)  # = n_firms * n_banks
    with pytest.raises(NonpositiveFitness):
        calibrate_z([-1.0, 1.0], t, 1.0)


@given(st.floats(1.0, 40.0), st.integers(0, 2**16))
@settings(max_examples=25, deadline=None)
def test_calibrate_z_monotone_in_target(target, seed):
    rng = np.random.default_rng(seed)
    s = rng.lognormal(0.0, 1.0, 10)
    t = rng.lognormal(0.0, 1.0, 5)
    z_lo = calibrate_z(s, t, target)
    z_hi = calibrate_z(s, t, target + 1.0)
    assert z_hi > z_lo


def test_dcgm_weight_identity(rng):
    s = rng.lognormal(1, 1, 8)
    t = rng.lognormal(1, 1, 6)
    spec = FitnessSpec(s=s, t=t, z=calibrate_z(s, t, 12.0),
                       variant=Variant.NETWORK_DRIVEN)
    W = np.sqrt(s.sum() * t.sum())
    for i in range(8):
        for j in range(6):
            p = link_probability(spec, i, j)
            w = dcgm_weight(spec, i, j)
            # unconditional expectation p * w equals s_i t_j / W
            assert p * w == pytest.approx(s[i] * t[j] / W, rel=1e-12)


def test_expected_metrics_network_driven_reproduces_strengths(rng):
    w = (rng.random((15, 8)) < 0.4) * rng.lognormal(0, 1, (15, 8))
    w[0, 0] = max(w[0, 0], 1.0)
    sample = make_sample(w)
    spec = fitness_spec_from_sample(sample, Variant.NETWORK_DRIVEN)
    metrics = expected_metrics(spec)
    s, t = derived_strengths(sample.network)
    # S = T here, so expected strengths equal node strengths exactly
    np.testing.assert_allclose(metrics.firm_strengths, s, rtol=1e-10)
    np.testing.assert_allclose(metrics.bank_strengths, t, rtol=1e-10)
    assert metrics.firm_degrees.sum() == pytest.approx(
        sample.network.n_links, rel=1e-9)


def test_balance_driven_variant_uses_balance_sizes(rng):
    w = (rng.random((10, 5)) < 0.5) * rng.uniform(1, 4, (10, 5))
    w[0, 0] = max(w[0, 0], 1.0)
    s_bal = rng.uniform(1, 100, 10)
    t_bal = rng.uniform(1, 100, 5)
    sample = make_sample(w, s_bal=s_bal, t_bal=t_bal)
    spec = fitness_spec_from_sample(sample, Variant.BALANCE_DRIVEN)
    np.testing.assert_allclose(spec.s, s_bal)
    np.testing.assert_allclose(spec.t, t_bal)
    assert spec.probability_matrix().sum() == pytest.approx(
        sample.network.n_links, rel=1e-9)


def test_solve_bicm_matches_targets_and_oracle(rng):
    w = (rng.random((12, 7)) < 0.4) * 1.0
    w[0, :] = 0.0  # an isolated firm
    w[1, 0] = 1.0
    net = make_network(w)
    k, h = derived_degrees(net)
    spec = solve_bicm(k, h, tol=1e-10)
    p = spec.probability_matrix()
    np.testing.assert_allclose(p.sum(axis=1), k, atol=1e-8)
    np.testing.assert_allclose(p.sum(axis=0), h, atol=1e-8)
    assert spec.x[0] == 0.0 and (p[0] == 0).all()
    p_oracle = bicm_fixed_point(k, h, tol=1e-10)
    np.testing.assert_allclose(p, p_oracle, atol=1e-6)


def test_solve_bicm_rejects_bad_targets():
    with pytest.raises(NonGraphicalTargets):
        solve_bicm([2.0, 1.0], [1.0, 1.0, 2.0])  # sums differ
    with pytest.raises(NonGraphicalTargets):
        solve_bicm([3.0, 0.0], [1.0, 1.0, 1.0])  # full-degree firm
    with pytest.raises(NonGraphicalTargets):
        solve_bicm([-1.0, 2.0], [1.0])


def test_bicm_from_network_carries_sizes():
    net = make_network([[1.0, 0.0, 2.0], [0.0, 3.0, 0.0], [4.0, 0.0, 0.0]])
    spec = bicm_from_network(net)
    s, t = derived_strengths(net)
    np.testing.assert_allclose(spec.s, s)
    assert spec.weight_norm == pytest.approx(np.sqrt(s.sum() * t.sum()))


def test_random_baseline_density(small_net):
    spec = random_baseline(small_net)
    assert np.all(spec.probability_matrix() == small_net.density)
    metrics = expected_metrics(spec)
    assert metrics.firm_degrees.sum() == pytest.approx(small_net.n_links)


def test_ensemble_reproducible_and_order_free(rng):
    s = rng.lognormal(0, 1, 10)
    t = rng.lognormal(0, 1, 6)
    spec = FitnessSpec(s=s, t=t, z=calibrate_z(s, t, 20.0),
                       variant=Variant.NETWORK_DRIVEN)
    a = sample_ensemble(spec, n_samples=50, seed=7)
    b = sample_ensemble(spec, n_samples=50, seed=7)
    np.testing.assert_array_equal(a.sum_weights, b.sum_weights)
    assert a.sum_links == b.sum_links
    c = sample_ensemble(spec, n_samples=50, seed=8)
    assert not np.array_equal(a.sum_firm_degrees, c.sum_firm_degrees)


def test_ensemble_prefix_property(rng):
    """The first n samples of a longer run equal a shorter run."""
    s = rng.lognormal(0, 1, 6)
    t = rng.lognormal(0, 1, 4)
    spec = FitnessSpec(s=s, t=t, z=calibrate_z(s, t, 8.0),
                       variant=Variant.NETWORK_DRIVEN)
    short, kept_short = sample_ensemble(spec, 5, seed=3, keep_samples=True)
    long, kept_long = sample_ensemble(spec, 9, seed=3, keep_samples=True)
    for ws, wl in zip(kept_short, kept_long):
        np.testing.assert_array_equal(ws, wl)


def test_ensemble_means_approach_expectations(rng):
    s = rng.lognormal(0, 0.8, 12)
    t = rng.lognormal(0, 0.8, 8)
    spec = FitnessSpec(s=s, t=t, z=calibrate_z(s, t, 30.0),
                       variant=Variant.NETWORK_DRIVEN)
    acc = sample_ensemble(spec, n_samples=4000, seed=11)
    metrics = expected_metrics(spec)
    se = acc.stderr_firm_degrees()
    assert np.all(np.abs(acc.mean_firm_degrees - metrics.firm_degrees)
                  <= 5 * np.maximum(se, 1e-3))
    assert acc.mean_links == pytest.approx(30.0, rel=0.05)
    np.testing.assert_allclose(acc.mean_firm_strengths.sum(),
                               metrics.firm_strengths.sum(), rtol=0.05)
