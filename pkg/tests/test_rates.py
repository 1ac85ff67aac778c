import json

import numpy as np
import pytest

from fdmimo import (SystemConfig, dl_rates_fd_imperfect, fd_rates_mc,
                    overheads, tdd_rates_mc)
from fdmimo.bounds import prop2_rates
from fdmimo.channel import realize_channels, trial_rng
from fdmimo.estimation import estimate_all
from fdmimo.rates import (_batch_dl_logrates, _batch_ul_logrates,
                          dl_sinr_fd_perfect, per_cell_factors,
                          ul_sinr_fd_imperfect, ul_sinr_fd_perfect)

from conftest import random_profile


def as_batch(real):
    return {"Gu": real.G_u[None], "Gd": real.G_d[None], "F": real.F[None]}


def test_per_cell_factors_values(small_profile, small_config):
    fac = per_cell_factors(small_profile, small_config)
    jj = np.arange(small_profile.L)
    own = small_profile.beta_d[jj, jj]
    np.testing.assert_allclose(
        fac.gamma, small_config.M * own.sum(axis=1) / small_profile.K_d)
    np.testing.assert_allclose(fac.eta * fac.gamma,
                               1.0 / small_profile.K_d)
    np.testing.assert_allclose(
        fac.eta_tilde * fac.gamma_tilde,
        small_config.M * small_config.P_tr / small_profile.K_d)


def test_overheads_all_cases():
    cfg = SystemConfig(L=2, M=8, K_f=1, K_h_u=1, K_h_d=2, P_u=1, P_d=1,
                       P_tr=1, kappa=0.0, sigma2=1.0, T=100)
    assert overheads(cfg, "fd", "perfect") == (1.0, 1.0)
    assert overheads(cfg, "fd", "imperfect") == ((100 - 4) / 100,) * 2
    assert overheads(cfg, "tdd", "perfect") == (0.5, 0.5)
    o_ul, o_dl = overheads(cfg, "tdd", "imperfect")
    assert o_ul == pytest.approx(0.5 * (100 - 2) / 100)
    assert o_dl == pytest.approx(0.5 * (100 - 3) / 100)


def test_single_cell_uplink_reduces_to_snr():
    """With one cell, one user and no downlink the uplink SINR is the
    maximum-ratio-combining SNR P_u |g|^2 / sigma^2."""
    prof = random_profile(np.random.default_rng(1), L=1, K_f=0, K_h_u=1,
                          K_h_d=1)
    cfg = SystemConfig(L=1, M=8, K_f=0, K_h_u=1, K_h_d=1, P_u=3.0, P_d=1.0,
                       P_tr=1.0, kappa=0.0, sigma2=2.0, T=50)
    real = realize_channels(prof, 4, cfg.M)
    fac = per_cell_factors(prof, cfg)
    lu = _batch_ul_logrates(as_batch(real), prof, cfg, fac, "tdd", "perfect",
                            np.random.default_rng(0))[0]
    g = real.G_u[0, 0, :, 0]
    snr = 3.0 * np.vdot(g, g).real / 2.0
    assert lu[0, 0] == pytest.approx(np.log2(1 + snr), rel=1e-12)


def test_batch_matches_loop_dl_perfect(small_profile, small_config):
    real = realize_channels(small_profile, 21, small_config.M)
    fac = per_cell_factors(small_profile, small_config)
    ld = _batch_dl_logrates(as_batch(real), small_profile, small_config, fac,
                            "fd", "perfect")[0]
    K_f = small_profile.K_f
    for l in range(small_profile.L):
        for k in range(small_profile.K_d):
            cls = "FD" if k < K_f else "HD"
            ref = np.log2(1 + dl_sinr_fd_perfect(real, small_config, fac,
                                                 small_profile, l, k, cls))
            assert ld[l, k] == pytest.approx(ref, rel=1e-10)


def test_batch_matches_loop_ul_without_bs_bs(small_profile, small_config):
    """With vanishing cross-cell BS gains the uplink batch path is exactly the
    direct per-user evaluation (the BS-BS term is resampled otherwise)."""
    bb = np.full_like(small_profile.beta_b, 1e-30)
    np.fill_diagonal(bb, small_profile.beta_b.diagonal())
    prof = small_profile.__class__(beta_u=small_profile.beta_u,
                                   beta_d=small_profile.beta_d, beta_b=bb,
                                   beta_I=small_profile.beta_I,
                                   K_f=small_profile.K_f)
    real = realize_channels(prof, 22, small_config.M)
    fac = per_cell_factors(prof, small_config)
    lu = _batch_ul_logrates(as_batch(real), prof, small_config, fac, "fd",
                            "perfect", np.random.default_rng(0))[0]
    for j in range(prof.L):
        for n in range(prof.K_u):
            ref = np.log2(1 + ul_sinr_fd_perfect(real, small_config, fac,
                                                 prof, j, n))
            assert lu[j, n] == pytest.approx(ref, rel=1e-10)


def test_bs_bs_term_statistically_consistent(small_profile, small_config):
    """Uplink mean rates from the resampled BS-BS term match the direct
    M x M evaluation within Monte Carlo error."""
    trials = 500
    fac = per_cell_factors(small_profile, small_config)
    acc = np.zeros((small_profile.L, small_profile.K_u))
    for t in range(trials):
        real = realize_channels(small_profile, trial_rng(31, t), small_config.M)
        for j in range(small_profile.L):
            for n in range(small_profile.K_u):
                acc[j, n] += np.log2(1 + ul_sinr_fd_perfect(
                    real, small_config, fac, small_profile, j, n))
    loop = acc / trials
    rep = fd_rates_mc(small_profile, small_config, 4000, 77, csi="perfect")
    loop_se = np.abs(loop).max() / np.sqrt(trials) * 0.5   # coarse scale
    assert np.abs(loop - rep.ul_rates).max() < 5 * (rep.ul_stderr.max() + loop_se)


def test_imperfect_ul_loop_reference(small_profile, small_config):
    real = realize_channels(small_profile, 23, small_config.M)
    est = estimate_all(real, small_profile, small_config, 24)
    fac = per_cell_factors(small_profile, small_config)
    s = ul_sinr_fd_imperfect(real, est, small_config, fac, small_profile, 1, 2)
    assert np.isfinite(s) and s > 0


def test_mc_determinism(small_profile, small_config):
    a = fd_rates_mc(small_profile, small_config, 64, 5, csi="perfect")
    b = fd_rates_mc(small_profile, small_config, 64, 5, csi="perfect")
    np.testing.assert_array_equal(a.ul_rates, b.ul_rates)
    np.testing.assert_array_equal(a.dl_rates, b.dl_rates)


def test_mc_seed_sensitivity(small_profile, small_config):
    a = fd_rates_mc(small_profile, small_config, 64, 5, csi="perfect")
    b = fd_rates_mc(small_profile, small_config, 64, 6, csi="perfect")
    assert not np.array_equal(a.ul_rates, b.ul_rates)


def test_mc_rejects_invalid_config(small_profile, small_config):
    with pytest.raises(ValueError, match="invalid config"):
        fd_rates_mc(small_profile, small_config.replace(kappa=2.0), 8, 0)


def test_fd_imperfect_dl_is_analytic(small_profile, small_config):
    rep = fd_rates_mc(small_profile, small_config, 32, 9, csi="imperfect")
    np.testing.assert_array_equal(rep.dl_stderr, 0.0)
    np.testing.assert_allclose(rep.dl_rates,
                               dl_rates_fd_imperfect(small_profile, small_config))


def test_analytic_dl_equals_closed_form_bound(small_profile, small_config):
    """The moment-based downlink evaluation and the closed-form bound are the
    same algebraic object."""
    _, dl = prop2_rates(small_profile, small_config)
    np.testing.assert_allclose(dl_rates_fd_imperfect(small_profile, small_config),
                               dl, rtol=1e-9)


def test_tdd_excludes_fd_terms(small_profile, small_config):
    """TDD rates must not depend on kappa, BS-BS or UE-UE gains."""
    hi = small_config.replace(kappa=0.09)
    lo = small_config.replace(kappa=0.0)
    a = tdd_rates_mc(small_profile, hi, "perfect", 16, 3)
    b = tdd_rates_mc(small_profile, lo, "perfect", 16, 3)
    np.testing.assert_array_equal(a.ul_rates, b.ul_rates)
    np.testing.assert_array_equal(a.dl_rates, b.dl_rates)


def test_report_se_and_serialization(tmp_path, small_profile, small_config):
    rep = fd_rates_mc(small_profile, small_config, 16, 1, csi="imperfect")
    np.testing.assert_allclose(rep.ul_se_per_cell,
                               rep.overhead_ul * rep.ul_rates.sum(axis=1))
    rows = rep.rows()
    assert len(rows) == small_profile.K_u * 3 + small_profile.K_d * 3
    csv_path = tmp_path / "r.csv"
    rep.to_csv(csv_path)
    text = csv_path.read_text()
    assert text.startswith("system,csi,cell,user,class,rate,stderr")
    json_path = tmp_path / "r.json"
    rep.to_json(json_path)
    data = json.loads(json_path.read_text())
    assert data["csi"] == "imperfect" and len(data["rows"]) == len(rows)
