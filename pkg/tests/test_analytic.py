import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noma_impulsive import analytic as A
from noma_impulsive.analytic import (
    AccuracyError,
    ConditionError,
    NoiseState,
    WrongEngineError,
    mixture_sinr,
    outage,
    outage_joint,
    success_general,
    success_user1_m3,
    success_user2_m3,
    success_user3_m3,
    tdma_outage,
)
from noma_impulsive.config import make_scenario

W, I = NoiseState.BACKGROUND, NoiseState.IMPULSIVE
PHI = 2**0.5 - 1


def float_closed_forms(a, phi, rho):
    """Plain double-precision transcription of the three-user closed forms."""
    a1, a2, a3 = a
    p1, p2, p3 = phi
    s1 = math.exp(-3 * p1 / (rho * a1))
    d = a2 - p2 * a1
    e2 = math.exp(-2 * p2 / (rho * a2))
    s2 = e2 + (math.exp(-3 * p2 / (rho * d)) - e2) / (1 - 3 * a2 / (2 * d))
    c1 = a3 - p3 * a2
    c2 = a3 - p3 * (a1 + a2)
    c3 = p3 / (rho * a3)
    k = 2 - 3 * c1 / c2
    u = 1 - 3 * a3 / c2
    v = 1 - 3 * a3 / c2 - a3 * k / c1
    s3 = (
        math.exp(-c3)
        + math.exp(-2 * p3 / (rho * c1)) * (1 - math.exp(-c3 * (1 - 2 * a3 / c1))) / (1 - 2 * a3 / c1)
        + 2 * math.exp(-3 * p3 / (rho * c2)) / k
        * ((1 - math.exp(-c3 * u)) / u - (1 - math.exp(-c3 * v)) / (math.exp(p3 * k / (rho * c1)) * v))
    )
    return s1, s2, s3


def simulated_success(a, phi, rho, n=2_000_000, seed=0):
    """Per-user decoding success from sorted exponential gains (no decomposition)."""
    rng = np.random.default_rng(seed)
    g = np.sort(rng.exponential(size=(n, len(a))), axis=1)
    a = np.asarray(a)
    out = []
    for i in range(len(a)):
        interference = g[:, :i] @ a[:i]
        out.append(np.mean(a[i] * g[:, i] > phi[i] * (interference + 1 / rho)))
    return np.array(out)


# frozen from float_closed_forms((1,1,1), (PHI,)*3, 10)
S1_10DB, S2_10DB, S3_10DB = 0.8831465987033617, 0.9920284831636148, 0.9994317110821608


def test_frozen_values_match_float_oracle():
    assert float_closed_forms((1, 1, 1), (PHI,) * 3, 10) == pytest.approx((S1_10DB, S2_10DB, S3_10DB), abs=1e-14)


def test_closed_forms_at_10db(awgn_10db):
    assert success_user1_m3(awgn_10db, W) == pytest.approx(0.88314, abs=1e-5)
    assert success_user2_m3(awgn_10db, W) == pytest.approx(0.99203, abs=1e-5)
    assert success_user3_m3(awgn_10db, W) == pytest.approx(0.99943, abs=1e-5)
    assert success_user1_m3(awgn_10db, W) == pytest.approx(S1_10DB, abs=1e-14)
    assert success_user2_m3(awgn_10db, W) == pytest.approx(S2_10DB, abs=1e-14)
    assert success_user3_m3(awgn_10db, W) == pytest.approx(S3_10DB, abs=1e-14)


def test_closed_forms_match_simulation(awgn_10db):
    sim = simulated_success((1, 1, 1), (PHI,) * 3, 10.0)
    se = np.sqrt(sim * (1 - sim) / 2_000_000)
    exact = np.array([S1_10DB, S2_10DB, S3_10DB])
    assert np.all(np.abs(sim - exact) <= 4 * se + 1e-12)


def test_zero_threshold_always_succeeds():
    sc = make_scenario(rates=0.0, rho_w_db=0)
    for f in (success_user1_m3, success_user2_m3, success_user3_m3):
        assert f(sc, W) == 1.0
    for i in (1, 2, 3):
        assert success_general(i, sc, I) == 1.0


def test_noiseless_limit():
    sc = make_scenario(rho_w_db=120)
    assert abs(success_user1_m3(sc, W) - 1) < 1e-9


def test_closed_forms_need_three_users():
    sc = make_scenario(m=2, rates=0.5)
    with pytest.raises(WrongEngineError):
        success_user1_m3(sc, W)


def test_condition_errors():
    sc = make_scenario(rates=2.0, rho_w_db=10)  # phi = 3 > 1
    with pytest.raises(ConditionError):
        success_user2_m3(sc, W)
    with pytest.raises(ConditionError):
        success_user3_m3(sc, W)


valid_m3 = st.tuples(
    st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0.2, 5),
    st.floats(0.01, 1.5), st.floats(0.01, 1.5), st.floats(0.01, 1.5),
    st.floats(-5, 35),
).map(lambda t: make_scenario(a=t[:3], rates=t[3:6], p=0.0, rho_w_db=t[6]))


@given(valid_m3)
def test_general_engine_matches_closed_forms(sc):
    for i, f in ((1, success_user1_m3), (2, success_user2_m3), (3, success_user3_m3)):
        if sc.closed_form_valid(i):
            assert abs(success_general(i, sc, W, backend="quad") - f(sc, W)) <= 1e-6


def test_general_engine_examples(awgn_10db):
    assert success_general(1, awgn_10db, W) == pytest.approx(0.88314, abs=1e-5)
    assert success_general(2, awgn_10db, W) == pytest.approx(0.99203, abs=1e-5)


def test_degenerate_middle_case():
    # phi = 1, equal powers: a_2 == phi * a_1, decoding needs y_2 > phi / (rho a_2)
    sc = make_scenario(rates=1.0, rho_w_db=3)
    exact = math.exp(-2 / sc.rho_w)
    assert success_general(2, sc, W) == pytest.approx(exact, abs=1e-10)
    assert success_general(2, sc, W, backend="mc", samples=400_000) == pytest.approx(exact, abs=5e-3)


@pytest.mark.parametrize("db", [0, 10, 25])
def test_negative_denominator_case_against_simulation(db):
    # a_3 < phi (a_1 + a_2): the closed form does not apply
    sc = make_scenario(rates=1.2, rho_w_db=db, p=0.0)
    assert not sc.closed_form_valid(3) and not sc.closed_form_valid(2)
    sim = simulated_success(sc.a, sc.phi, sc.rho_w, n=1_000_000, seed=db)
    for i in (2, 3):
        quad = success_general(i, sc, W, backend="quad")
        se = math.sqrt(max(sim[i - 1] * (1 - sim[i - 1]), 1e-12) / 1_000_000)
        assert abs(quad - sim[i - 1]) <= 4 * se + 1e-9


@pytest.mark.parametrize("m, i", [(4, 4), (5, 3), (6, 5)])
def test_backends_agree_for_larger_m(m, i):
    sc = make_scenario(m=m, rates=0.5, beta_db=1, rho_w_db=5)
    q, qe = success_general(i, sc, W, backend="quad", full_output=True)
    mc, me = success_general(i, sc, W, backend="mc", samples=1 << 20, rng=(5, m, i), full_output=True)
    assert abs(q - mc) <= 3 * math.hypot(qe, me) + 2.0**-20
    assert 1e-4 < 1 - q < 0.999


def test_general_engine_large_i_uses_monte_carlo():
    sc = make_scenario(m=6, rates=0.5, beta_db=1, rho_w_db=5)
    s, err = success_general(6, sc, W, full_output=True)
    assert 0 <= s <= 1 and err > 0


def test_accuracy_error_carries_estimate():
    sc = make_scenario(rates=0.5, rho_w_db=0)
    with pytest.raises(AccuracyError) as exc:
        success_general(3, sc, W, backend="mc", samples=1000, tol=1e-6)
    assert exc.value.achieved > 1e-6


def test_user_index_range(awgn_10db):
    with pytest.raises(ValueError):
        success_general(0, awgn_10db, W)
    with pytest.raises(ValueError):
        outage(4, awgn_10db)


def test_outage_examples(awgn_10db, impulsive_10db):
    assert outage(1, awgn_10db) == pytest.approx(0.12439, abs=1e-5)
    assert outage(1, awgn_10db) == pytest.approx(1 - S1_10DB * S2_10DB * S3_10DB, abs=1e-14)
    assert outage(1, impulsive_10db) == pytest.approx(0.13315, abs=1e-5)
    assert outage(1, make_scenario(rates=0.0, p=0.0)) == 0.0


def test_outages_matches_outage(impulsive_10db):
    assert A.outages(impulsive_10db) == pytest.approx([outage(j, impulsive_10db) for j in (1, 2, 3)], abs=1e-15)


def test_success_table_state_ordering(impulsive_10db):
    table = A.success_table(impulsive_10db)
    for i in (1, 2, 3):
        assert 0 <= table[i, "I"] <= table[i, "w"] <= 1


scenarios = st.builds(
    lambda a, r, p, g, db: make_scenario(a=a, rates=r, p=p, gamma=g, rho_w_db=db),
    st.lists(st.floats(0.3, 4), min_size=3, max_size=3),
    st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3),
    st.floats(0, 1),
    st.floats(0, 2000),
    st.floats(-5, 40),
)


@given(scenarios)
def test_outage_affine_in_p(sc):
    for j in (1, 2, 3):
        lhs = outage(j, sc)
        rhs = (1 - sc.p) * outage(j, sc.replace(p=0.0)) + sc.p * outage(j, sc.replace(p=1.0))
        assert abs(lhs - rhs) <= 1e-12


@given(scenarios)
def test_gamma_zero_removes_p_dependence(sc):
    sc0 = sc.replace(gamma=0.0)
    for j in (1, 2, 3):
        assert abs(outage(j, sc0) - outage(j, sc0.replace(p=0.0))) <= 1e-12


@given(scenarios, st.floats(0.5, 10))
def test_outage_monotone_in_snr(sc, step):
    higher = sc.replace(rho_w_db=sc.config.rho_w_db + step)
    for j in (1, 2, 3):
        o = outage(j, sc)
        assert 0 <= o <= 1
        assert outage(j, higher) <= o + 1e-12


@given(scenarios, st.integers(1, 3), st.floats(0.01, 0.5))
def test_outage_monotone_in_rates(sc, i, bump):
    rates = list(sc.config.target_rates)
    rates[i - 1] += bump
    bigger = sc.replace(target_rates=tuple(rates))
    for j in range(1, i + 1):
        assert outage(j, bigger) >= outage(j, sc) - 1e-12


@given(scenarios)
def test_impulsive_state_never_helps(sc):
    sc = sc.replace(gamma=max(sc.gamma, 1.0))
    for i in (1, 2, 3):
        assert A.failure_probability(i, sc, I) >= A.failure_probability(i, sc, W) - 1e-12


def test_outage_is_accurate_far_below_epsilon():
    sc = make_scenario(p=0.0, rho_w_db=60)
    # strongest user fails like kappa / rho^3 with kappa = phi^3 / (c1 c2)
    kappa = PHI**3 / ((1 - PHI) * (1 - 2 * PHI))
    assert outage(3, sc) == pytest.approx(kappa / 1e18, rel=1e-4)
    assert A._general(3, sc, W)[1] == pytest.approx(outage(3, sc), rel=1e-6)


def test_mixture_sinr_examples():
    sc = make_scenario(p=0.0, rho_w_db=10)
    assert mixture_sinr(1, [0.2, 0.5, 1.0], sc) == pytest.approx(2.0)
    assert mixture_sinr(2, [0.2, 0.5, 1.0], sc) == pytest.approx(0.5 / 0.3)
    collapsed = make_scenario(p=1.0, gamma=0.0, rho_w_db=10)
    assert mixture_sinr(2, [0.2, 0.5, 1.0], collapsed) == pytest.approx(0.5 / 0.3)


def test_tdma_examples():
    sc = make_scenario(p=0.0, rho_w_db=10)
    # direct evaluation: 1 - exp(-(2**1.5 - 1) / 10)
    assert tdma_outage(1, sc) == pytest.approx(0.16710, abs=1e-5)
    sc = make_scenario(p=0.01, gamma=100, rho_w_db=10)
    assert tdma_outage(1, sc) == pytest.approx(0.99 * 0.1671008499 + 0.01 * (1 - math.exp(-(2**1.5 - 1) * 10.1)), abs=1e-9)
    assert tdma_outage(1, sc) == pytest.approx(0.17543, abs=1e-5)
    assert tdma_outage(2, make_scenario(rates=0.0)) == 0.0


def test_tdma_without_rate_scaling_uses_noma_threshold():
    sc = make_scenario(p=0.0, rho_w_db=10)
    assert tdma_outage(1, sc, "none") == pytest.approx(1 - math.exp(-PHI / 10))
    with pytest.raises(ValueError):
        tdma_outage(1, sc, "half")


@pytest.mark.parametrize("db", [0, 10, 20])
def test_joint_outage_backends_agree(db):
    sc = make_scenario(p=0.01, gamma=100, rho_w_db=db)
    for j in (1, 2, 3):
        q, qe = outage_joint(j, sc, full_output=True)
        mc, me = outage_joint(j, sc, backend="mc", rng=(db, j), full_output=True)
        assert abs(q - mc) <= 3 * math.hypot(qe, me) + 2.0**-20
    assert 1e-4 < 1 - q < 0.999 + 1e-9


def test_joint_equals_product_for_strongest_user(impulsive_10db):
    # a single decoding event: nothing to be independent of
    assert outage_joint(3, impulsive_10db) == pytest.approx(outage(3, impulsive_10db), abs=1e-8)


def test_product_form_overstates_joint_outage_at_low_snr():
    sc = make_scenario(p=0.0, rho_w_db=0)
    assert outage(1, sc) - outage_joint(1, sc) > 0.05
