import math

import numpy as np
import pytest

import repeaterlab.rates as R
from repeaterlab.rates import ProtocolParams


def params(L, n, **kw):
    return ProtocolParams(L_km=L, n=n, **kw)


# -- elementary ingredients ------------------------------------------------


def test_transmission_endpoints():
    assert R.transmission(0.0) == pytest.approx(1.0)
    assert R.transmission(44.0, 22.0) == pytest.approx(math.exp(-1.0))


def test_attenuation_doc_value():
    # 0.2 dB/km corresponds to an attenuation length of (rounded) 22 km
    L_att = 10.0 / (0.2 * math.log(10.0))
    assert L_att == pytest.approx(22.0, rel=0.02)


def test_direct_transmission_reference():
    assert R.direct_transmission_time(500.0) == pytest.approx(1.0)
    assert R.direct_transmission_time(600.0) == pytest.approx(100.0)
    assert R.direct_transmission_time(1000.0) == pytest.approx(1e10)
    assert R.direct_transmission_time(0.0) == pytest.approx(1e-10)


def test_max_p_linear():
    p = R.max_p_for_fidelity(2, 0.81, 0.9)
    assert p == pytest.approx(0.1 / (56.0 * 0.19))
    assert p == pytest.approx(0.0094, abs=2e-4)  # rounds to the quoted 0.01
    assert R.max_p_for_fidelity(2, 0.81, 1.0) == pytest.approx(0.0)
    assert math.isinf(R.max_p_for_fidelity(2, 1.0, 0.9))


def test_max_p_quadratic_sits_on_the_loss_curve():
    for n in range(5):
        p = R.max_p_for_fidelity_quadratic(n, 0.81, 0.9)
        x = p * 0.19
        loss = R.A_TABLE[n] * x - R.B_TABLE[n] * x * x
        assert loss == pytest.approx(0.1, abs=1e-12)


# -- closed forms against their product representation -----------------------


def breakdowns_for_product_check():
    yield R.dlcz_T_tot(params(630, 2, p=0.01))
    yield R.dlcz_T_tot(params(500, 0, p=0.02))
    yield R.jiang_T_tot(params(610, 2, p=0.037))
    yield R.jiang_T_tot(params(610, 1, p=0.05))
    yield R.chen_T_tot(params(640, 4))
    yield R.chen_T_tot(params(640, 0))
    yield R.sps_T_tot(params(580, 2, alpha2=0.84))
    yield R.sps_T_tot(params(580, 0, alpha2=0.5))
    yield R.pair_source_T_tot(params(560, 3, p=0.013, alpha2=0.26))
    yield R.pair_source_T_tot(params(560, 0, p=0.013, alpha2=0.26))


@pytest.mark.parametrize(
    "bd",
    list(breakdowns_for_product_check()),
    ids=lambda b: f"{b.protocol}-n{b.params.n}",
)
def test_closed_form_equals_probability_product(bd):
    assert bd.T_tot == pytest.approx(bd.product_form(), rel=1e-9)


def test_dlcz_level_zero_reduction():
    # T(n=0) = (3/2) (L0/c) / P0 / P_ps with P_ps = eta^2/2
    bd = R.dlcz_T_tot(params(400, 0, p=0.015))
    expected = 1.5 * bd.params.comm_time / bd.P0 / (bd.params.eta**2 / 2.0)
    assert bd.T_tot == pytest.approx(expected, rel=1e-12)


# -- anchor points -----------------------------------------------------------


def test_dlcz_anchor_630():
    p = R.max_p_for_fidelity_quadratic(2, 0.81)
    T = R.dlcz_T_tot(params(630, 2, p=p)).T_tot
    assert T == pytest.approx(340.0, rel=0.10)


def test_jiang_anchor_610():
    T = R.jiang_T_tot(params(610, 2, p=0.037)).T_tot
    assert T == pytest.approx(190.0, rel=0.10)


def test_jiang_degenerates_cleanly_at_unit_efficiency():
    bd = R.jiang_T_tot(params(610, 2, p=0.037, eta_m=1.0, eta_d=1.0))
    assert bd.weights.c1 == pytest.approx(0.0)
    assert bd.weights.c0 == pytest.approx(0.0)
    assert bd.P_ps == pytest.approx(1.0)


def test_chen_anchor_640_lower_bound():
    bd = R.chen_T_tot(params(640, 4))
    assert "lower-bound" in bd.notes
    assert bd.T_tot == pytest.approx(610.0, rel=0.15)


def test_chen_prep_time_inclusion():
    lean = R.chen_T_tot(params(640, 4))
    full = R.chen_T_tot(params(640, 4, p=0.01), include_prep=True)
    assert full.T_prep == pytest.approx(25.0 / (12.0 * 1e7 * 0.01 * 0.9))
    assert full.T_tot > lean.T_tot
    ratio = (lean.params.comm_time + full.T_prep) / lean.params.comm_time
    assert full.T_tot == pytest.approx(lean.T_tot * ratio, rel=1e-12)


def test_chen_saturates_without_loss():
    # eta_t -> 1 and eta -> 1 leave only the waiting-time skeleton
    bd = R.chen_T_tot(
        ProtocolParams(L_km=1e-9, n=3, eta_m=1.0, eta_d=1.0)
    )
    assert bd.T_tot == pytest.approx(8.0 * 27.0 * bd.params.comm_time, rel=1e-6)


def test_simon_anchor_510():
    p = R.max_p_for_fidelity_quadratic(2, 0.81)
    T = R.simon_multimode_T_tot(params(510, 2, p=p, N_m=100)).T_tot
    assert T == pytest.approx(1.4, rel=0.15)


def test_simon_reduces_to_dlcz():
    p = 0.01
    a = R.simon_multimode_T_tot(params(700, 2, p=p, N_m=1))
    b = R.dlcz_T_tot(params(700, 2, p=p))
    assert a.T_tot == pytest.approx(b.T_tot, rel=1e-12)


def test_simon_scales_inversely_with_modes():
    p = 1e-3
    a = R.simon_multimode_T_tot(params(800, 2, p=p, N_m=1))
    b = R.simon_multimode_T_tot(params(800, 2, p=p, N_m=50))
    assert b.T_tot == pytest.approx(a.T_tot / 50.0, rel=1e-12)


def test_simon_warns_out_of_regime():
    with pytest.warns(UserWarning):
        R.simon_multimode_T_tot(params(50, 0, p=0.05, N_m=100))


def test_sps_anchor_580():
    bd = R.sps_T_tot(params(580, 2, alpha2=0.84))
    assert bd.T_tot == pytest.approx(44.0, rel=0.10)
    assert bd.P0 == pytest.approx(9.2e-3, rel=0.05)


def test_sps_two_photon_working_point():
    # four-link constraint p2 = 0.0011 implies p = 0.006
    p = R.sps_p_for_two_photon(0.0011, 0.9, 0.9)
    assert p == pytest.approx(0.006, abs=2e-4)
    assert R.sps_two_photon_amplitude(p, 0.9, 0.9) == pytest.approx(0.0011)


def test_sps_needs_photons_toward_station():
    with pytest.raises(ValueError):
        R.sps_T_tot(params(580, 2, alpha2=1.0))


def test_pair_source_anchor_560():
    bd = R.pair_source_T_tot(params(560, 3, p=0.013, alpha2=0.26))
    assert bd.T_tot == pytest.approx(15.0, rel=0.10)
    assert bd.params.comm_time == pytest.approx(350e-6, rel=0.01)
    # preparation and communication time are comparable at this point
    assert 250e-6 < bd.T_s < 500e-6


def test_pair_source_fidelity_probability_tradeoff():
    w = R.pair_source_weights(0.0, 0.81)
    assert w.c2 == pytest.approx(1.0)  # perfect pairs
    with pytest.raises(R.InfeasibleError):
        R.pair_source_T_tot(params(560, 3, p=0.013, alpha2=0.0))


def test_zhao_scaling():
    base = R.pair_source_T_tot(params(560, 3, p=0.013, alpha2=0.26))
    z = R.zhao_T_tot(params(560, 3, p=0.013, alpha2=0.26))
    assert z.T_tot == pytest.approx(base.T_tot / 0.013**2, rel=1e-12)
    assert "order-of-magnitude" in z.notes
    z2 = R.zhao_T_tot(params(560, 3, p=1.0, alpha2=0.26))
    b2 = R.pair_source_T_tot(params(560, 3, p=1.0, alpha2=0.26))
    assert z2.T_tot == pytest.approx(b2.T_tot, rel=1e-12)


def test_zhao_monotone_in_p():
    ts = [
        R.zhao_T_tot(params(560, 3, p=p, alpha2=0.26)).T_tot
        for p in (0.005, 0.01, 0.02, 0.05)
    ]
    assert all(a > b for a, b in zip(ts, ts[1:]))


def test_zhao_is_four_orders_slower_at_percent_emission():
    z = R.zhao_T_tot(params(560, 3, p=0.01, alpha2=0.26))
    b = R.pair_source_T_tot(params(560, 3, p=0.01, alpha2=0.26))
    assert z.T_tot / b.T_tot == pytest.approx(1e4)


# -- stationary weights ------------------------------------------------------


@pytest.mark.parametrize(
    "weights,eta",
    [
        (R.jiang_weights(0.81), 0.81),
        (R.chen_weights(0.81, 0.3), 0.81),
        (R.pair_source_weights(0.26, 0.81), 0.81),
    ],
)
def test_weights_are_normalized_and_stationary(weights, eta):
    assert weights.normalization_defect() < 1e-12
    assert abs(weights.stationarity_defect()) < 1e-12
    updated, prob = weights.swap_update(eta)
    assert 0.0 < prob <= 1.0
    assert updated.c2 == pytest.approx(weights.c2, abs=1e-12)
    assert updated.c1 == pytest.approx(weights.c1, abs=1e-12)
    assert updated.c0 == pytest.approx(weights.c0, abs=1e-12)


def test_weight_update_probability_matches_closed_forms():
    eta = 0.81
    w = R.jiang_weights(eta)
    _, prob = w.swap_update(eta)
    assert prob == pytest.approx(eta**2 / (2.0 * (2.0 - eta) ** 2))
    eta_t = 0.3
    wc = R.chen_weights(eta, eta_t)
    _, probc = wc.swap_update(eta)
    assert probc == pytest.approx(eta**2 / (2.0 * (2.0 - eta * eta_t) ** 2))


def test_nonstationary_weights_converge_to_stationary_ratio():
    w = R.LinkWeights(c2=0.7, c1=0.05, c0=0.1)
    for _ in range(40):
        w, _ = w.swap_update(0.81)
    assert abs(w.stationarity_defect()) < 1e-12


# -- global monotonicity ------------------------------------------------------


@pytest.mark.parametrize("proto", ["dlcz", "jiang", "chen", "sps", "pair_source"])
def test_time_monotone_in_efficiencies_and_distance(proto):
    def T(L, eta_m, eta_d):
        kw = dict(eta_m=eta_m, eta_d=eta_d)
        if proto == "dlcz":
            return R.dlcz_T_tot(params(L, 2, p=0.01, **kw)).T_tot
        if proto == "jiang":
            return R.jiang_T_tot(params(L, 2, p=0.037, **kw)).T_tot
        if proto == "chen":
            return R.chen_T_tot(params(L, 3, **kw)).T_tot
        if proto == "sps":
            return R.sps_T_tot(params(L, 2, alpha2=0.84, **kw)).T_tot
        return R.pair_source_T_tot(params(L, 3, p=0.013, alpha2=0.26, **kw)).T_tot

    assert T(650, 0.9, 0.9) > T(600, 0.9, 0.9)
    assert T(600, 0.85, 0.9) > T(600, 0.9, 0.9)
    assert T(600, 0.9, 0.85) > T(600, 0.9, 0.9)


@pytest.mark.parametrize("proto", ["dlcz", "jiang", "chen", "sps", "pair_source"])
def test_probabilities_in_unit_interval(proto):
    rng = np.random.default_rng(17)
    for _ in range(25):
        eta_m, eta_d = rng.uniform(0.5, 1.0, size=2)
        L = rng.uniform(200.0, 1200.0)
        kw = dict(eta_m=eta_m, eta_d=eta_d)
        if proto == "dlcz":
            bd = R.dlcz_T_tot(params(L, 2, p=0.01, **kw))
        elif proto == "jiang":
            bd = R.jiang_T_tot(params(L, 2, p=0.037, **kw))
        elif proto == "chen":
            bd = R.chen_T_tot(params(L, 3, **kw))
        elif proto == "sps":
            bd = R.sps_T_tot(params(L, 2, alpha2=0.84, **kw))
        else:
            bd = R.pair_source_T_tot(params(L, 3, p=0.013, alpha2=0.26, **kw))
        for prob in (bd.P0, *bd.swap_probs, bd.P_ps):
            assert 0.0 < prob <= 1.0


# -- agreement with the brute-force chain ------------------------------------


def test_dlcz_closed_forms_match_brute_force():
    from repeaterlab.dlcz import (
        build_chain,
        elementary_link,
        post_select,
        swap,
        swap_success_p0,
    )

    eta = 0.81
    bd = R.dlcz_T_tot(params(600, 3, p=0.01))
    # P_0: the heralding circuit's click probability is p * eta_d * eta_t
    link = elementary_link(eta_det_t=bd.params.eta_d * bd.params.eta_t,
                           approx=False)
    p0_coeff = link.success_prob.coeffs[1].real
    assert p0_coeff * bd.params.p == pytest.approx(bd.P0, abs=1e-9)
    # swap probabilities level by level
    chain = build_chain(0, eta)
    for closed in bd.swap_probs:
        assert swap_success_p0(chain, chain, eta) == pytest.approx(
            closed, abs=1e-9
        )
        chain = swap(chain, chain, eta)
    # final post-selection probability
    _, p_ps = post_select(chain, chain, eta)
    assert p_ps.coeffs[0].real == pytest.approx(bd.P_ps, abs=1e-9)


def test_params_validation():
    with pytest.raises(ValueError):
        ProtocolParams(L_km=-1.0)
    with pytest.raises(ValueError):
        ProtocolParams(L_km=100.0, eta_m=1.5)
    with pytest.raises(ValueError):
        ProtocolParams(L_km=100.0, p=0.0)
    with pytest.raises(ValueError):
        ProtocolParams(L_km=100.0, N_m=0)


def test_dlcz_rejects_degenerate_efficiencies():
    with pytest.raises(ValueError):
        R.dlcz_T_tot(params(600, 2, p=0.01, eta_m=0.0))
    with pytest.raises(ValueError):
        R.dlcz_T_tot(params(600, 2))  # p unset
