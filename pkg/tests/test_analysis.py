"""Closed-form moment and rate checks against analytic cases and Monte Carlo."""

import numpy as np
import pytest

from relaysim import analysis, config as cfg, link
from relaysim.channel import substream
from relaysim.quantizer import IDEAL, AdcSpec


def _rel(x, y):
    return abs(x - y) / max(abs(y), 1e-300)


# ---------------------------------------------------------------------------
# product-matrix moments

def test_lemma_moments_identity_matrices():
    m = 5
    eye = np.eye(m)
    same = analysis.lemma1_moments(eye, eye, 2, 2)
    assert same.inner_first == pytest.approx(m)
    assert same.inner_second == pytest.approx(m ** 2 + m)
    np.testing.assert_allclose(same.row_first, np.ones(m), atol=1e-14)
    np.testing.assert_allclose(same.row_second, 2.0 * np.ones(m), atol=1e-14)
    diff = analysis.lemma1_moments(eye, eye, 0, 3)
    assert diff.inner_first == pytest.approx(0.0)
    assert diff.inner_second == pytest.approx(m)
    np.testing.assert_allclose(diff.row_first, np.zeros(m), atol=1e-14)
    np.testing.assert_allclose(diff.row_second, np.ones(m), atol=1e-14)


def test_lemma_moments_against_sampling():
    rng = substream(11, "lemma-mc-test")
    p_mat = (rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))) / 2
    q_mat = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / 2
    for i, j in ((0, 1), (2, 2)):
        closed = analysis.lemma1_moments(p_mat, q_mat, i, j)
        sampled = analysis.lemma1_moments_mc(p_mat, q_mat, i, j, 40000, rng)
        assert abs(sampled.inner_first - closed.inner_first) \
            <= 5.0 * max(sampled.inner_first_se, 1e-12)
        assert abs(sampled.inner_second - closed.inner_second) \
            <= 5.0 * max(sampled.inner_second_se, 1e-12)
        np.testing.assert_array_less(
            np.abs(sampled.row_first - closed.row_first),
            5.0 * np.maximum(sampled.row_first_se, 1e-12))
        np.testing.assert_array_less(
            np.abs(sampled.row_second - closed.row_second),
            5.0 * np.maximum(sampled.row_second_se, 1e-12))


# ---------------------------------------------------------------------------
# separable-moment oracles against the Monte Carlo engine

_MOMENT_SCENARIO = cfg.ScenarioConfig(
    N=24, delta=1.5, K=4, tau1=8, tau2=8, q1=2, q2=3,
    betas=(1.0, 0.7, 1.3, 0.9), eta=0.8, r_R=0.6, r_B=0.5,
    csi="estimated", trials=900, seed=7)


def test_moment_oracles_match_simulation():
    scn = _MOMENT_SCENARIO
    prep = link.prepare(scn)
    outcomes = link.trial_outcomes(prep, scn.trials, scn.seed)
    cross = analysis.cross_moment(prep.hop1, prep.hop2)
    predictions = {
        "desired_raw": analysis.desired_signal_moment(prep.hop1, prep.hop2),
        "leakage_raw": analysis.leakage_moment(prep.hop1, prep.hop2),
        "cross_raw": cross.sum(axis=1) - np.diag(cross),
        "chain_raw": analysis.chain_norm_moment(prep.hop1, prep.hop2),
        "relay_quant_raw": analysis.relay_quant_moment(
            prep.hop1, prep.hop2, scn.adc1, scn.P_U, scn.sigma_R2),
        "bs_vector_raw": analysis.bs_vector_moment(prep.hop2),
        "bs_quant_raw": analysis.bs_quant_moment(
            prep.hop2, scn.adc2, scn.P_R, scn.sigma_B2),
    }
    for name, predicted in predictions.items():
        stack = outcomes[name]
        mean = stack.mean(axis=0)
        se = stack.std(axis=0, ddof=1) / np.sqrt(scn.trials)
        dev = np.abs(mean - predicted) / np.maximum(se, 1e-300)
        assert dev.max() < 5.0, f"{name}: worst deviation {dev.max():.2f} se"


def test_cross_moment_diagonal_decomposes():
    hop1, hop2 = cfg.scenario_models(_MOMENT_SCENARIO)
    cross = analysis.cross_moment(hop1, hop2)
    desired = analysis.desired_signal_moment(hop1, hop2)
    leak = analysis.leakage_moment(hop1, hop2)
    np.testing.assert_allclose(np.diag(cross), desired + leak, rtol=1e-10)


def test_amplification_closed_form_matches_sampling():
    scn = _MOMENT_SCENARIO
    closed = link.amplification_factor_closed(scn)
    sampled = link.amplification_factor_mc(scn, trials=1500, seed=3)
    assert abs(sampled - closed) / closed < 0.02


# ---------------------------------------------------------------------------
# genie-CSI fast path

def test_perfect_csi_terms_collapse():
    scn = cfg.ScenarioConfig(N=48, delta=1.5, K=5, q1=2, q2=1,
                             betas=(1.0, 0.8, 1.2, 0.6, 1.1), eta=0.9,
                             r_R=0.6, r_B=0.5, csi="perfect")
    hop1, hop2 = cfg.scenario_models(scn)
    kappa = analysis.kappa_closed_form(hop1, scn.adc1, scn.P_U, scn.P_R,
                                       scn.sigma_R2)
    terms, chi = analysis.rate_terms(hop1, hop2, scn.adc1, scn.adc2, scn.P_U,
                                     scn.P_R, scn.sigma_R2, scn.sigma_B2, kappa)
    fast_terms, fast_kappa, fast_chi = analysis.perfect_csi_terms(scn)
    assert fast_kappa == pytest.approx(kappa, rel=1e-12)
    assert fast_chi == pytest.approx(chi, rel=1e-12)
    np.testing.assert_allclose(fast_terms.signal, terms.signal, rtol=1e-9)
    np.testing.assert_allclose(fast_terms.interference, terms.interference,
                               rtol=1e-9)
    np.testing.assert_allclose(fast_terms.noise_relay, terms.noise_relay,
                               rtol=1e-9)
    np.testing.assert_allclose(fast_terms.noise_bs, terms.noise_bs, rtol=1e-9)


def test_sum_rate_approx_uses_genie_models_in_perfect_mode():
    scn = cfg.ScenarioConfig(N=64, K=6, betas=(1.0,) * 6, eta=1.0,
                             csi="perfect")
    via_models = analysis.sum_rate_approx(scn)
    via_fast = analysis.sum_rate_perfect_csi(scn)
    assert via_fast.sum_rate == pytest.approx(via_models.sum_rate, rel=1e-9)


# ---------------------------------------------------------------------------
# report bookkeeping

def test_report_recomputes_from_terms():
    scn = _MOMENT_SCENARIO
    report = analysis.sum_rate_approx(scn)
    assert report.provenance == "closed-form"
    sinr = report.sinr()
    expected = scn.mu * np.sum(np.log2(1.0 + sinr))
    assert report.sum_rate == pytest.approx(expected, rel=1e-12)
    np.testing.assert_array_less(0.0, report.signal)
    np.testing.assert_array_less(0.0, report.interference)
    np.testing.assert_array_less(0.0, report.noise_relay)
    np.testing.assert_array_less(0.0, report.noise_bs)
    assert report.per_user_rate.shape == (scn.K,)


def test_empty_system_reports_zero_rate():
    scn = cfg.ScenarioConfig(K=0, betas=())
    report = analysis.sum_rate_approx(scn)
    assert report.sum_rate == 0.0
    assert report.per_user_rate.shape == (0,)


# ---------------------------------------------------------------------------
# resolution and correlation orderings of the closed form

def test_rate_improves_with_resolution():
    base = cfg.ScenarioConfig(N=96, K=6, betas=(1.0,) * 6, eta=1.0)
    rates = [analysis.sum_rate_approx(base.with_updates(q1=q, q2=q)).sum_rate
             for q in (1, 3, IDEAL)]
    assert rates[0] < rates[1] < rates[2]


def test_rate_degrades_with_correlation():
    base = cfg.ScenarioConfig(N=96, K=6, betas=(1.0,) * 6, eta=1.0)
    clean = analysis.sum_rate_approx(base.with_updates(r_R=0.0, r_B=0.0))
    tight = analysis.sum_rate_approx(base.with_updates(r_R=0.9, r_B=0.9))
    assert tight.sum_rate < clean.sum_rate


# ---------------------------------------------------------------------------
# power-scaling limits

_LIMIT_ARGS = dict(gains=np.array([1.0, 2.0]), relay_gain=0.5,
                   adc1=AdcSpec.from_bits(2), adc2=AdcSpec.from_bits(3),
                   relay_noise_var=1.3, bs_noise_var=0.7,
                   e_u=4.0, e_r=9.0, user=1)


def test_limit_unbounded_when_both_exponents_small():
    lim = analysis.power_scaling_limit(a=0.5, b=0.5, **_LIMIT_ARGS)
    assert lim.regime == "unbounded"
    assert np.isinf(lim.value)


def test_limit_vanishes_when_scaling_too_fast():
    for a, b in ((1.5, 1.0), (1.0, 1.2), (2.0, 2.0)):
        lim = analysis.power_scaling_limit(a=a, b=b, **_LIMIT_ARGS)
        assert lim.regime == "vanishing"
        assert lim.value == 0.0


def test_limit_user_power_only():
    # scaling only the user power with clean relay ADCs leaves
    # beta * E_U / sigma_R^2 exactly
    lim = analysis.power_scaling_limit(
        gains=np.array([1.0]), relay_gain=0.5, adc1=AdcSpec.from_bits(IDEAL),
        adc2=AdcSpec.from_bits(3), relay_noise_var=1.0, bs_noise_var=0.7,
        a=1.0, b=0.5, e_u=10.0, e_r=9.0, user=0)
    assert lim.regime == "user-limited"
    assert lim.value == pytest.approx(10.0, rel=1e-12)


def test_limit_relay_power_only():
    lim = analysis.power_scaling_limit(a=0.5, b=1.0, **_LIMIT_ARGS)
    assert lim.regime == "relay-limited"
    alpha2 = 1.0 - 0.03454
    expected = alpha2 * 4.0 * 0.5 * 9.0 / (0.7 * 5.0)
    assert lim.value == pytest.approx(expected, rel=1e-6)


def test_limit_joint_scaling_hand_check():
    lim = analysis.power_scaling_limit(a=1.0, b=1.0, **_LIMIT_ARGS)
    assert lim.regime == "jointly-limited"
    alpha1 = 1.0 - 0.1175
    alpha2 = 1.0 - 0.03454
    zeta = (alpha2 * 2.0 * 0.5 * 1.3 * 9.0
            + 0.7 * (alpha1 * 4.0 * 5.0 + 1.3 * 3.0))
    assert lim.zeta == pytest.approx(zeta, rel=1e-9)
    expected = alpha1 * alpha2 * 4.0 * 0.5 * 4.0 * 9.0 / zeta
    assert lim.value == pytest.approx(expected, rel=1e-9)


def test_joint_scaling_limit_is_approached():
    # equal-gain users, matched powers chosen so the finite-system rate sits
    # near its limit already at moderate antenna counts
    scn = cfg.ScenarioConfig(N=4096, K=10, q1=2, q2=2, csi="perfect",
                             betas=(1.0,) * 10, eta=1.0, E_U=1.0,
                             E_R=10.0 ** 0.5, a=1.0, b=1.0)
    finite = analysis.sum_rate_perfect_csi(scn).sum_rate
    limit = analysis.asymptotic_sum_rate(scn)
    assert np.isfinite(limit) and limit > 0.0
    assert _rel(finite, limit) < 0.02


def test_asymptotic_sum_rate_propagates_infinity():
    scn = cfg.ScenarioConfig(N=128, K=4, betas=(1.0,) * 4, eta=1.0,
                             a=0.5, b=0.5)
    assert np.isinf(analysis.asymptotic_sum_rate(scn))
