import math

import numpy as np
import pytest

from fdmimo import (HomogeneousConfig, LargeScaleProfile,
                    PowerScalingSchedule, SystemConfig,
                    antenna_reduction_curve, asymptotic_gain_limits,
                    asymptotic_rates, closed_form_report, expand_homogeneous,
                    fd_gain, homogeneous_rates, prop1_rates, prop2_rates,
                    wishart_inverse_moments)
from fdmimo.experiments import reference_schedule

from conftest import random_config, random_profile, uniform_mixed_profile


def unit_profile():
    """Single cell, one full-duplex user, every gain exactly 1."""
    ones = np.ones((1, 1, 1))
    return LargeScaleProfile(beta_u=ones, beta_d=ones.copy(),
                             beta_b=np.ones((1, 1)),
                             beta_I=np.ones((1, 1, 1, 1)), K_f=1)


def unit_cfg(M=3, **kw):
    d = dict(L=1, M=M, K_f=1, K_h_u=0, K_h_d=0, P_u=1.0, P_d=1.0, P_tr=1.0,
             kappa=0.0, sigma2=1.0, T=196)
    d.update(kw)
    return SystemConfig(**d)


def test_prop1_hand_values_m3():
    """Single cell, unit gains, unit powers, M = 3.

    Uplink: numerator P_u (M-1) = 2, denominator sigma^2 = 1 -> log2(3).
    Downlink: eta = 1/3, numerator eta (M-1)(M-2) = 2/3; the only downlink
    interference is the user's own cancelled uplink signal, so the
    denominator is sigma^2 = 1 -> log2(5/3).
    """
    ul, dl = prop1_rates(unit_profile(), unit_cfg())
    assert ul[0, 0] == pytest.approx(math.log2(3.0), rel=1e-14)
    assert dl[0, 0] == pytest.approx(math.log2(5.0 / 3.0), rel=1e-14)


def test_prop1_kappa_raises_noise_floor():
    ul0, dl0 = prop1_rates(unit_profile(), unit_cfg())
    ul1, dl1 = prop1_rates(unit_profile(), unit_cfg(kappa=0.05))
    assert ul1[0, 0] < ul0[0, 0] and dl1[0, 0] < dl0[0, 0]
    # uplink denominator gains exactly kappa * P_d * beta_b = 0.05
    assert ul1[0, 0] == pytest.approx(math.log2(1 + 2.0 / 1.05), rel=1e-14)


def test_prop2_hand_value_single_cell_ul():
    """M = 3, unit everything: lambda = 2, est_err = 1, N_t = 2 -> rate
    log2(1 + 2/3)."""
    ul, _ = prop2_rates(unit_profile(), unit_cfg())
    assert ul[0, 0] == pytest.approx(math.log2(1 + 2.0 / 3.0), rel=1e-14)


def test_bounds_require_m3():
    with pytest.raises(ValueError):
        prop1_rates(unit_profile(), unit_cfg(M=2))
    with pytest.raises(ValueError):
        prop2_rates(unit_profile(), unit_cfg(M=2))


def test_tdd_variant_drops_cross_terms():
    """In the TDD bounds neither kappa nor the BS-BS / UE-UE gains appear."""
    rng = np.random.default_rng(3)
    prof = random_profile(rng, L=3, K_f=0, K_h_u=2, K_h_d=2)
    cfg = random_config(rng, prof, M=16)
    prof2 = LargeScaleProfile(beta_u=prof.beta_u, beta_d=prof.beta_d,
                              beta_b=prof.beta_b * 7.0,
                              beta_I=prof.beta_I * 7.0, K_f=0)
    for fn in (prop1_rates, prop2_rates):
        a = fn(prof, cfg, system="tdd")
        b = fn(prof2, cfg.replace(kappa=0.09), system="tdd")
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])
        fd_a = fn(prof, cfg, system="fd")
        assert (fd_a[0] <= a[0] + 1e-12).all()
        assert (fd_a[1] <= a[1] + 1e-12).all()


def test_homogeneous_reduction_spot():
    h = HomogeneousConfig(L=5, K=4, beta=0.4, M=32, P_u=2.0, P_d=8.0,
                          P_tr=2.0, kappa=1e-4, T=196)
    prof = expand_homogeneous(h)
    cfg = h.system_config()
    ul, dl = prop1_rates(prof, cfg)
    hu, hd = homogeneous_rates(h, "perfect")
    assert abs(h.K * ul[0, 0] - hu) < 1e-12
    assert abs(h.K * dl[0, 0] - hd) < 1e-12
    ul2, dl2 = prop2_rates(prof, cfg)
    hu2, hd2 = homogeneous_rates(h, "imperfect")
    pref = h.K * (h.T - h.tau) / h.T
    assert abs(pref * ul2[0, 0] - hu2) < 1e-12
    assert abs(pref * dl2[0, 0] - hd2) < 1e-12


def test_homogeneous_monotone_in_m():
    h = HomogeneousConfig(L=7, K=5, beta=0.3, M=64, P_u=10.0, P_d=100.0,
                          P_tr=10.0, kappa=1e-5, T=196)
    for csi in ("perfect", "imperfect"):
        ms = [3, 8, 32, 100, 500, 5000]
        vals = [sum(homogeneous_rates(h, csi, M=m)) for m in ms]
        assert all(a < b for a, b in zip(vals, vals[1:]))


def test_asymptotic_rates_perfect_law():
    prof = unit_profile()
    sched = PowerScalingSchedule(E_u=4.0, E_d=4.0, E_tr=4.0,
                                 exponent="perfect_csi_1_over_M")
    ul, dl = asymptotic_rates(prof, unit_cfg(M=100), sched)
    assert ul[0, 0] == pytest.approx(math.log2(5.0))
    assert dl[0, 0] == pytest.approx(math.log2(5.0))


def test_asymptotic_rates_imperfect_law():
    prof = unit_profile()
    sched = PowerScalingSchedule(E_u=3.0, E_d=3.0, E_tr=3.0,
                                 exponent="imperfect_csi_1_over_sqrtM")
    ul, dl = asymptotic_rates(prof, unit_cfg(M=100), sched)
    assert ul[0, 0] == pytest.approx(math.log2(1 + 9.0))
    assert dl[0, 0] == pytest.approx(math.log2(1 + 9.0))
    with pytest.raises(ValueError):
        asymptotic_rates(prof, unit_cfg(),
                         PowerScalingSchedule(E_u=1, E_d=1, E_tr=1,
                                              exponent="none"))


def test_bounds_converge_to_asymptote():
    """At very large M with the matching scaled-down powers the closed-form
    bounds approach the limit rates."""
    prof = uniform_mixed_profile()
    base = SystemConfig(L=3, M=64, K_f=2, K_h_u=1, K_h_d=2, P_u=10.0,
                        P_d=100.0, P_tr=10.0, kappa=1e-5, sigma2=1.0, T=196)
    for csi, fn in (("perfect", prop1_rates), ("imperfect", prop2_rates)):
        law = ("perfect_csi_1_over_M" if csi == "perfect"
               else "imperfect_csi_1_over_sqrtM")
        fac = 64.0 if csi == "perfect" else 8.0
        sched = PowerScalingSchedule(E_u=base.P_u * fac, E_d=base.P_d * fac,
                                     E_tr=base.P_tr * fac, exponent=law)
        cfg = sched.apply(base, 10 ** 6)
        a_ul, a_dl = asymptotic_rates(prof, cfg, sched)
        ul, dl = fn(prof, cfg)
        np.testing.assert_allclose(ul, a_ul, rtol=0.01)
        np.testing.assert_allclose(dl, a_dl, rtol=0.01)


def test_asymptotic_gain_limits_values():
    cfg = SystemConfig(L=2, M=8, K_f=0, K_h_u=5, K_h_d=5, P_u=1, P_d=1,
                       P_tr=1, kappa=0.0, sigma2=1.0, T=196)
    assert asymptotic_gain_limits(cfg, "perfect") == (2.0, 2.0)
    g_ul, g_dl = asymptotic_gain_limits(cfg, "imperfect")
    assert g_ul == pytest.approx(2 * (1 - 5 / (196 - 5)))
    assert g_dl == pytest.approx(2 * (1 - 5 / (196 - 5)))


def test_fd_gain_shapes_and_asymptotes(small_profile, small_config):
    fd = closed_form_report(small_profile, small_config, "perfect", "fd")
    tdd = closed_form_report(small_profile, small_config, "perfect", "tdd")
    g = fd_gain(fd, tdd, small_config)
    assert g.asymptote_ul == 2.0 and g.gain_ul > 0
    # per-user TDD rates dominate FD rates; the gain comes from concurrency
    assert (fd.ul_rates <= tdd.ul_rates + 1e-12).all()
    assert g.gain_ul < 2.0


def test_wishart_moment_formulas():
    assert wishart_inverse_moments(1, 4) == (pytest.approx(1 / 3),
                                             pytest.approx(1 / 6))
    assert wishart_inverse_moments(2, 8) == (pytest.approx(1 / 3),
                                             pytest.approx(16 / 210))
    with pytest.raises(ValueError):
        wishart_inverse_moments(3, 3)
    with pytest.raises(ValueError):
        wishart_inverse_moments(3, 4)


def test_antenna_reduction_curve_monotone(paper_homogeneous):
    pts = antenna_reduction_curve(paper_homogeneous, [100], "imperfect",
                                  gains=[1.0, 1.2, 1.4])
    assert [p.se_gain for p in pts] == [1.0, 1.2, 1.4]
    m_fd = [p.M_fd for p in pts]
    assert m_fd == sorted(m_fd)
    # matching TDD spectral efficiency needs fewer antennas in full duplex
    assert pts[0].M_fd < 100 and pts[0].antenna_reduction > 1.0
    assert all(p.reachable for p in pts)


def test_antenna_reduction_unreachable_flag(paper_homogeneous):
    pts = antenna_reduction_curve(paper_homogeneous, [100], "imperfect",
                                  gains=[50.0], M_max=10_000)
    assert not pts[0].reachable and pts[0].M_fd == 10_000


def test_reference_schedule_anchor(paper_homogeneous):
    h = paper_homogeneous
    s = reference_schedule(h, "perfect", m_ref=64)
    assert s.powers_at(64) == pytest.approx((h.P_u, h.P_d, h.P_tr))
    s = reference_schedule(h, "imperfect", m_ref=64)
    assert s.powers_at(64) == pytest.approx((h.P_u, h.P_d, h.P_tr))
