import numpy as np
import pytest

from creditnet.econometrics import (AbsorbedColumns, AllRowsDropped,
                                    DegreeSource, DegreeVariant, DesignMatrix,
                                    EconError, FixedEffects, Model, ModelSpec,
                                    MissingNullModel, RankDeficient,
                                    Separation, SingletonGroupsOnly, Stage,
                                    build_design, fit_logit, fit_ols,
                                    fit_ols_fixed_effects, herman_correct, vif)
from creditnet.nullmodel import Variant, fitness_spec_from_sample
from conftest import make_network, make_sample
from oracles import (logit_loglik, logit_newton, ols_normal_equations,
                     ols_with_group_dummies, vif_from_correlation)


def random_sample(rng, nf=25, nb=8, p=0.35):
    from creditnet.core import BankAttributes, FirmAttributes, Sample

    w = (rng.random((nf, nb)) < p) * rng.lognormal(3.0, 1.0, (nf, nb))
    w[:, 0] = np.maximum(w[:, 0], 0.5)  # keep every bank linked
    # leave some firms single-banked so is_exclusive has variation
    for i in range(nf):
        if not w[i].any():
            w[i, rng.integers(nb)] = 1.0
    w[0, 1:] = 0.0
    net = make_network(w)
    s_net, t_net = w.sum(axis=1), w.sum(axis=0)
    firm_attrs = {
        fid: FirmAttributes(
            balance_strength=float(s_net[i] * rng.uniform(1.0, 2.0)),
            total_assets=float(s_net[i] * rng.uniform(2.0, 5.0)),
            leverage=float(rng.uniform(0.1, 0.9)),
            roa=float(rng.normal(1.0, 0.5)),
            tangibility=float(rng.uniform(0.05, 0.95)),
        )
        for i, fid in enumerate(net.firm_ids)
    }
    bank_attrs = {
        bid: BankAttributes(
            balance_strength=float(t_net[j] * rng.uniform(1.0, 2.0)),
            total_assets=float(t_net[j] * rng.uniform(2.0, 5.0)),
            leverage=float(rng.uniform(8.0, 15.0)),
            roa=float(rng.normal(0.5, 0.2)),
        )
        for j, bid in enumerate(net.bank_ids)
    }
    return Sample(net, firm_attrs, bank_attrs, label="random")


# --------------------------------------------------------------------------
# rest-of-the-world corrections


def test_herman_stage1_subtracts_focal_link():
    net = make_network([[10.0, 0.0], [5.0, 2.0]])
    c = herman_correct(net, 1, 0, Stage.LINK_FORMATION, s_bal=9.0, t_bal=20.0)
    assert c.firm_degree == 1.0  # k=2 minus the focal link
    assert c.bank_degree == 1.0
    assert c.firm_net_strength == 2.0  # 7 - 5
    assert c.bank_net_strength == 10.0  # 15 - 5
    assert c.firm_bal_strength == 9.0  # untouched at stage 1
    assert c.bank_bal_strength == 20.0


def test_herman_stage1_absent_pair_unchanged():
    net = make_network([[10.0, 0.0], [5.0, 2.0]])
    c = herman_correct(net, 0, 1, Stage.LINK_FORMATION, s_bal=4.0, t_bal=3.0)
    assert c.firm_degree == 1.0 and c.bank_degree == 1.0
    assert c.firm_net_strength == 10.0 and c.bank_net_strength == 2.0


def test_herman_stage2_subtracts_from_balance_too():
    net = make_network([[10.0, 0.0], [5.0, 2.0]])
    c = herman_correct(net, 1, 0, Stage.LOAN_SIZING, s_bal=9.0, t_bal=20.0)
    assert c.firm_degree == 1.0 and c.bank_degree == 1.0
    assert c.firm_bal_strength == 4.0  # 9 - 5
    assert c.bank_bal_strength == 15.0  # 20 - 5
    assert c.firm_net_strength == 2.0


def test_herman_stage2_clamps_negative_balance():
    net = make_network([[10.0]])
    c = herman_correct(net, 0, 0, Stage.LOAN_SIZING, s_bal=3.0, t_bal=30.0)
    assert c.firm_bal_strength == 0.0  # 3 - 10, clamped
    assert c.bank_bal_strength == 20.0


def test_herman_stage2_requires_existing_link():
    net = make_network([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(EconError):
        herman_correct(net, 0, 1, Stage.LOAN_SIZING)


# --------------------------------------------------------------------------
# design assembly


def test_design_column_sets():
    m1 = ModelSpec(Stage.LINK_FORMATION, Model.M1_GRAVITY)
    m2a = ModelSpec(Stage.LINK_FORMATION, Model.M2_NETWORK)
    m2b = ModelSpec(Stage.LINK_FORMATION, Model.M2_NETWORK,
                    DegreeVariant.B_WITHOUT_DEGREE)
    m3a = ModelSpec(Stage.LOAN_SIZING, Model.M3_FULL)
    sample = random_sample(np.random.default_rng(0))
    cols = {name: build_design(sample, spec).column_names
            for name, spec in
            (("m1", m1), ("m2a", m2a), ("m2b", m2b), ("m3a", m3a))}
    assert "ln_s_net" not in cols["m1"] and "ln_s_bal" in cols["m1"]
    assert cols["m2a"] == ("ln_s_net", "ln_k", "is_exclusive",
                           "ln_t_net", "ln_h")
    assert cols["m2b"] == ("ln_s_net", "ln_t_net")
    assert set(cols["m2a"]) | set(cols["m1"]) == set(cols["m3a"])


def test_design_drop_network_strength():
    spec = ModelSpec(Stage.LOAN_SIZING, Model.M3_FULL,
                     drop_network_strength=True)
    d = build_design(random_sample(np.random.default_rng(1)), spec)
    assert "ln_s_net" not in d.column_names
    assert "ln_t_net" not in d.column_names
    assert "ln_k" in d.column_names


def test_design_placebo_requires_full_model():
    with pytest.raises(EconError):
        ModelSpec(Stage.LINK_FORMATION, Model.M2_NETWORK,
                  degree_source=DegreeSource.NULL_NET)
    with pytest.raises(EconError):
        ModelSpec(Stage.LINK_FORMATION, Model.M2_NETWORK,
                  drop_network_strength=True)


def test_design_placebo_cross_controls():
    sample = random_sample(np.random.default_rng(2))
    nets = {
        DegreeSource.NULL_NET: fitness_spec_from_sample(
            sample, Variant.NETWORK_DRIVEN),
        DegreeSource.NULL_BAL: fitness_spec_from_sample(
            sample, Variant.BALANCE_DRIVEN),
    }
    d_net = build_design(sample, ModelSpec(
        Stage.LINK_FORMATION, Model.M3_FULL,
        degree_source=DegreeSource.NULL_NET), nets)
    d_bal = build_design(sample, ModelSpec(
        Stage.LINK_FORMATION, Model.M3_FULL,
        degree_source=DegreeSource.NULL_BAL), nets)
    # volume-driven null is controlled by accounting size, and vice versa
    assert "ln_s_bal" in d_net.column_names
    assert "ln_s_net" not in d_net.column_names
    assert "ln_s_net" in d_bal.column_names
    assert "ln_s_bal" not in d_bal.column_names
    assert "is_exclusive" not in d_net.column_names
    with pytest.raises(MissingNullModel):
        build_design(sample, ModelSpec(
            Stage.LINK_FORMATION, Model.M3_FULL,
            degree_source=DegreeSource.NULL_NET), {})


def test_design_row_scopes():
    sample = random_sample(np.random.default_rng(3))
    net = sample.network
    d1 = build_design(sample, ModelSpec(Stage.LINK_FORMATION, Model.M1_GRAVITY))
    assert d1.n_obs == net.n_firms * net.n_banks
    d2 = build_design(sample, ModelSpec(Stage.LOAN_SIZING, Model.M3_FULL))
    assert d2.n_obs == net.n_links
    assert np.all(d2.y == np.log(net.weights[d2.firm_index, d2.bank_index]))


def test_design_drops_rows_of_isolated_banks():
    w = np.zeros((6, 3))
    w[:4, 0] = 2.0
    w[2:, 1] = 3.0
    sample = make_sample(w)  # bank 2 isolated
    d = build_design(sample, ModelSpec(Stage.LINK_FORMATION, Model.M2_NETWORK))
    assert d.n_dropped == 6
    assert d.n_obs == 12
    assert 2 not in set(d.bank_index)


def test_design_exclusive_uses_uncorrected_degree():
    w = np.array([[4.0, 0.0], [1.0, 2.0]])
    sample = make_sample(w)
    d = build_design(sample, ModelSpec(Stage.LINK_FORMATION, Model.M2_NETWORK))
    excl = d.column("is_exclusive")
    expected = (w > 0).sum(axis=1)[d.firm_index] == 1
    np.testing.assert_array_equal(excl, expected.astype(float))


def test_design_log_floors():
    w = np.array([[1.5, 0.0], [0.4, 2.0]])
    sample = make_sample(w)
    d = build_design(sample, ModelSpec(Stage.LOAN_SIZING, Model.M2_NETWORK))
    # firm 0 with a single 1.5 loan: corrected strength 0 -> floored to ln 1
    assert d.column("ln_s_net")[0] == 0.0
    assert d.n_floored["ln_s_net"] >= 1
    # degrees: k-1 = 0 -> ln(max(0, 1)) = 0
    assert d.column("ln_k")[0] == 0.0


def test_design_all_rows_dropped():
    w = np.zeros((2, 2))
    sample = make_sample(w)
    with pytest.raises(AllRowsDropped):
        build_design(sample, ModelSpec(Stage.LOAN_SIZING, Model.M1_GRAVITY))


# --------------------------------------------------------------------------
# logit


def synthetic_logit(rng, n=400, p=3):
    X = rng.normal(0, 1, (n, p))
    beta = np.array([0.5, -1.0, 0.8, 0.3][:p + 1])
    eta = beta[0] + X @ beta[1:]
    y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(float)
    return X, y


def fake_design(X, y, names=None, dummies=()):
    names = tuple(names or (f"x{i}" for i in range(X.shape[1])))
    return DesignMatrix(
        spec=ModelSpec(Stage.LINK_FORMATION, Model.M1_GRAVITY),
        column_names=names, X=X, y=y,
        firm_index=np.zeros(len(y), dtype=int),
        bank_index=np.zeros(len(y), dtype=int),
        dummy_columns=frozenset(dummies), bank_columns=frozenset(),
        n_floored={}, n_dropped=0)


def test_logit_matches_newton_oracle(rng):
    X, y = synthetic_logit(rng)
    fit = fit_logit(fake_design(X, y))
    Xc = np.column_stack([np.ones(len(y)), X])
    beta_oracle = logit_newton(Xc, y)
    est = np.array([c.estimate for c in fit.coefficients.values()])
    np.testing.assert_allclose(est, beta_oracle, atol=1e-7)
    assert fit.converged
    # the oracle grid refinement cannot improve the likelihood
    ll_refined = logit_loglik(Xc, y, logit_grid := beta_oracle)
    assert fit.objective == pytest.approx(ll_refined, abs=1e-6)


def test_logit_perfect_balance_intercept():
    y = np.array([0.0, 1.0] * 50)
    X = np.zeros((100, 1))
    X[:, 0] = np.tile([0.0, 1.0], 50)[::-1]  # anti-aligned regressor
    fit = fit_logit(fake_design(X, y))
    assert fit.n_obs == 100
    assert fit.fit_stat == pytest.approx(
        1 - fit.objective / (100 * np.log(0.5)), abs=1e-9)


def test_logit_separation_detected(rng):
    X = rng.normal(0, 1, (80, 1))
    y = (X[:, 0] > 0).astype(float)
    with pytest.raises(Separation):
        fit_logit(fake_design(X, y))


def test_logit_single_class_rejected():
    with pytest.raises(EconError):
        fit_logit(fake_design(np.ones((10, 1)), np.ones(10)))


def test_logit_ame_continuous_and_dummy(rng):
    X, y = synthetic_logit(rng, n=600, p=2)
    X[:, 1] = (X[:, 1] > 0).astype(float)
    fit = fit_logit(fake_design(X, y, names=("cont", "dummy"),
                                dummies=("dummy",)))
    beta = [c.estimate for c in fit.coefficients.values()]
    Xc = np.column_stack([np.ones(len(y)), X])
    eta = Xc @ np.array(beta)
    p = 1 / (1 + np.exp(-eta))
    assert fit.ame["cont"] == pytest.approx(beta[1] * (p * (1 - p)).mean())
    p1 = 1 / (1 + np.exp(-(eta + (1 - X[:, 1]) * beta[2])))
    p0 = 1 / (1 + np.exp(-(eta - X[:, 1] * beta[2])))
    assert fit.ame["dummy"] == pytest.approx(float((p1 - p0).mean()))


def test_logit_stars_and_pvalues(rng):
    X, y = synthetic_logit(rng, n=2000)
    fit = fit_logit(fake_design(X, y))
    strong = fit.coefficients["x1"]  # true coefficient -1.0
    assert strong.stars == "***"
    assert strong.p_value < 0.01


# --------------------------------------------------------------------------
# OLS, fixed effects, VIF


def test_ols_matches_normal_equations(rng):
    X = rng.normal(0, 1, (120, 4))
    y = 1.0 + X @ np.array([2.0, -1.0, 0.5, 0.0]) + rng.normal(0, 0.3, 120)
    fit = fit_ols(fake_design(X, y))
    Xc = np.column_stack([np.ones(120), X])
    beta_o, se_o = ols_normal_equations(Xc, y)
    est = np.array([c.estimate for c in fit.coefficients.values()])
    ses = np.array([c.std_error for c in fit.coefficients.values()])
    np.testing.assert_allclose(est, beta_o, atol=1e-10)
    np.testing.assert_allclose(ses, se_o, atol=1e-10)
    assert 0.9 < fit.fit_stat <= 1.0


def test_ols_exact_fit():
    X = np.array([[1.0], [2.0], [3.0]])
    y = 2 * X[:, 0] + 1
    fit = fit_ols(fake_design(X, y))
    assert fit.coefficients["intercept"].estimate == pytest.approx(1.0)
    assert fit.coefficients["x0"].estimate == pytest.approx(2.0)
    assert fit.fit_stat == pytest.approx(1.0)


def test_ols_rank_deficiency_names_columns(rng):
    X = rng.normal(0, 1, (50, 3))
    X[:, 2] = 2 * X[:, 0] - X[:, 1]
    with pytest.raises(RankDeficient) as err:
        fit_ols(fake_design(X, y=rng.normal(0, 1, 50)))
    assert "x2" in err.value.columns


def test_fixed_effects_matches_dummy_oracle(rng):
    n, g = 200, 8
    groups = rng.integers(0, g, n)
    X = rng.normal(0, 1, (n, 3))
    alpha = rng.normal(0, 2, g)
    y = X @ np.array([1.5, -0.7, 0.2]) + alpha[groups] + rng.normal(0, 0.4, n)
    d = DesignMatrix(
        spec=ModelSpec(Stage.LOAN_SIZING, Model.M2_NETWORK,
                       fixed_effects=FixedEffects.BANK_DUMMIES),
        column_names=("x0", "x1", "x2"), X=X, y=y,
        firm_index=np.zeros(n, dtype=int), bank_index=groups,
        dummy_columns=frozenset(), bank_columns=frozenset(),
        n_floored={}, n_dropped=0)
    fit = fit_ols_fixed_effects(d)
    beta_o, se_o = ols_with_group_dummies(X, y, groups)
    est = np.array([c.estimate for c in fit.coefficients.values()])
    ses = np.array([c.std_error for c in fit.coefficients.values()])
    np.testing.assert_allclose(est, beta_o, atol=1e-8)
    np.testing.assert_allclose(ses, se_o, atol=1e-8)
    assert fit.extra["n_groups"] == g
    assert 0 <= fit.fit_stat <= 1
    assert fit.fit_stat <= fit.extra["r_squared_overall"] + 1e-9


def test_fixed_effects_rejects_bank_columns():
    d = DesignMatrix(
        spec=ModelSpec(Stage.LOAN_SIZING, Model.M3_FULL,
                       fixed_effects=FixedEffects.BANK_DUMMIES),
        column_names=("ln_t_net",), X=np.ones((10, 1)), y=np.ones(10),
        firm_index=np.zeros(10, dtype=int),
        bank_index=np.arange(10) % 3,
        dummy_columns=frozenset(), bank_columns=frozenset({"ln_t_net"}),
        n_floored={}, n_dropped=0)
    with pytest.raises(AbsorbedColumns):
        fit_ols_fixed_effects(d)


def test_fixed_effects_singleton_groups():
    d = DesignMatrix(
        spec=ModelSpec(Stage.LOAN_SIZING, Model.M2_NETWORK,
                       fixed_effects=FixedEffects.BANK_DUMMIES),
        column_names=("x0",), X=np.arange(4.0).reshape(4, 1),
        y=np.arange(4.0), firm_index=np.zeros(4, dtype=int),
        bank_index=np.arange(4), dummy_columns=frozenset(),
        bank_columns=frozenset(), n_floored={}, n_dropped=0)
    with pytest.raises(SingletonGroupsOnly):
        fit_ols_fixed_effects(d)


def test_design_fe_strips_bank_columns():
    sample = random_sample(np.random.default_rng(4))
    d = build_design(sample, ModelSpec(
        Stage.LOAN_SIZING, Model.M3_FULL,
        fixed_effects=FixedEffects.BANK_DUMMIES))
    assert not d.bank_columns
    assert "ln_t_net" not in d.column_names
    assert "ln_h" not in d.column_names
    fit = fit_ols_fixed_effects(d)
    assert fit.method == "ols_fe"


def test_vif_matches_correlation_oracle(rng):
    X = rng.normal(0, 1, (300, 4))
    X[:, 3] = 0.9 * X[:, 0] + 0.3 * rng.normal(0, 1, 300)
    d = fake_design(X, y=np.zeros(300))
    got = vif(d)
    expected = vif_from_correlation(X)
    for idx, name in enumerate(d.column_names):
        assert got[name] == pytest.approx(expected[idx], rel=1e-6)
    assert got["x3"] > got["x1"]


def test_vif_collinear_is_infinite(rng):
    X = rng.normal(0, 1, (100, 3))
    X[:, 2] = X[:, 0] + X[:, 1]
    got = vif(fake_design(X, y=np.zeros(100)))
    assert all(np.isinf(v) for v in got.values())


def test_model_spec_names():
    assert ModelSpec(Stage.LOAN_SIZING, Model.M3_FULL).name() == \
        "loan_sizing_m3_a"
    assert ModelSpec(Stage.LINK_FORMATION, Model.M1_GRAVITY).name() == \
        "link_formation_m1"
    spec = ModelSpec(Stage.LINK_FORMATION, Model.M3_FULL,
                     degree_source=DegreeSource.NULL_BAL)
    assert spec.name() == "link_formation_m3_a_null_bal"


def test_end_to_end_stage2_on_random_sample(rng):
    sample = random_sample(rng, nf=40, nb=10, p=0.4)
    d = build_design(sample, ModelSpec(Stage.LOAN_SIZING, Model.M3_FULL))
    fit = fit_ols(d)
    assert fit.n_obs == sample.network.n_links
    assert np.isfinite(fit.fit_stat)


def test_end_to_end_stage1_on_random_sample(rng):
    sample = random_sample(rng, nf=40, nb=10, p=0.3)
    d = build_design(sample, ModelSpec(Stage.LINK_FORMATION, Model.M1_GRAVITY))
    fit = fit_logit(d)
    assert fit.converged
    assert 0 <= fit.fit_stat < 1
