"""Closed-form lower bounds, homogeneous specializations, asymptotic limits,
full-duplex gain ratios and Wishart moment identities.

All evaluators also accept ``system="tdd"``, which removes the BS-BS, UE-UE
and transmitter-noise terms and is used for the closed-form TDD reference in
the asymptotic gain checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import (HomogeneousConfig, LargeScaleProfile, PowerScalingSchedule,
                     SystemConfig, expand_homogeneous)
from .estimation import estimation_stats
from .rates import PerCellFactors, RateReport, overheads, per_cell_factors


def _require_m3(cfg: SystemConfig):
    if cfg.M < 3:
        raise ValueError("closed-form lower bounds require M >= 3")


def prop1_rates(profile: LargeScaleProfile, cfg: SystemConfig,
                factors: PerCellFactors | None = None, system: str = "fd"):
    """Jensen lower bounds on the ergodic rates under perfect CSI.

    Returns (ul, dl) arrays of shape (L, K_u) and (L, K_d).
    """
    _require_m3(cfg)
    if factors is None:
        factors = per_cell_factors(profile, cfg)
    L, K_u, K_d, K_f, M = profile.L, profile.K_u, profile.K_d, profile.K_f, cfg.M
    fd = system == "fd"
    jj = np.arange(L)
    bu, bd, bb, bI = profile.beta_u, profile.beta_d, profile.beta_b, profile.beta_I

    ul = np.empty((L, K_u))
    for j in range(L):
        for n in range(K_u):
            I_up = cfg.P_u * (bu[j].sum() - bu[j, j, n])
            if fd:
                I_up += cfg.P_d * (bb[j].sum() - bb[j, j])
            kap = cfg.kappa * cfg.P_d * bb[j, j] if fd else 0.0
            num = cfg.P_u * (M - 1) * bu[j, j, n]
            ul[j, n] = np.log2(1.0 + num / (I_up + cfg.sigma2 + kap))

    dl = np.empty((L, K_d))
    for l in range(L):
        eta = factors.eta[l]
        for k in range(K_d):
            I_down = eta * cfg.P_d * (M - 2) * bd[l, l, k] * (bd[l, l].sum() - bd[l, l, k])
            I_down += cfg.P_d * (bd[:, l, k].sum() - bd[l, l, k])
            if fd:
                I_down += cfg.P_u * bI[l, k].sum()
                if k < K_f:
                    # own UE-UE term removed by SI cancellation, residual noise stays
                    I_down -= cfg.P_u * bI[l, k, l, k]
                    I_down += cfg.kappa * cfg.P_u * bI[l, k, l, k]
            num = eta * cfg.P_d * (M - 1) * (M - 2) * bd[l, l, k] ** 2
            dl[l, k] = np.log2(1.0 + num / (I_down + cfg.sigma2_dl))
    return ul, dl


def prop2_rates(profile: LargeScaleProfile, cfg: SystemConfig,
                factors: PerCellFactors | None = None, system: str = "fd"):
    """Lower bounds on the ergodic rates under MMSE-estimated CSI."""
    _require_m3(cfg)
    if factors is None:
        factors = per_cell_factors(profile, cfg)
    st = estimation_stats(profile, cfg)
    L, K_u, K_d, K_f, M = profile.L, profile.K_u, profile.K_d, profile.K_f, cfg.M
    fd = system == "fd"
    P_u, P_d, P_tr, s2 = cfg.P_u, cfg.P_d, cfg.P_tr, cfg.sigma2
    bu, bd, bb, bI = profile.beta_u, profile.beta_d, profile.beta_b, profile.beta_I
    eta_t = factors.eta_tilde
    lam_u, lam_d = st.lam_u, st.lam_d

    ul = np.empty((L, K_u))
    for j in range(L):
        for n in range(K_u):
            b_own = bu[j, j, n]
            contam = bu[j, :, n].sum() - b_own
            est_err = P_u * b_own * (s2 + P_tr * contam)
            I_up = 0.0
            for l in range(L):
                if l == j:
                    continue
                b = bu[j, l, n]
                I_up += P_tr * P_u * ((M + 1) * b ** 2
                                      + (bu[j, :, n].sum() - b) * b
                                      + b * s2 / P_tr)
            other = P_u * (bu[j].sum() - bu[j, :, n].sum())
            if fd:
                other += P_d * (bb[j].sum() - bb[j, j])
                other += cfg.kappa * P_d * bb[j, j]
            N_t = lam_u[j, n] * (other + s2)
            num = P_tr * P_u * (M - 1) * b_own ** 2
            ul[j, n] = np.log2(1.0 + num / (est_err + I_up + N_t))

    dl = np.empty((L, K_d))
    for l in range(L):
        for k in range(K_d):
            b_own = bd[l, l, k]
            I_dn = eta_t[l] * P_d * b_own ** 3 / lam_d[l, k]
            for j in range(L):
                if j == l:
                    continue
                b = bd[j, l, k]
                I_dn += eta_t[j] * P_tr * P_d * (M + 1) * b ** 2 * bd[j, j, k] ** 2 \
                    / lam_d[j, k] ** 2
                I_dn += eta_t[j] * P_d * bd[j, j, k] ** 2 \
                    * (s2 + P_tr * (bd[j, :, k].sum() - b)) * b / lam_d[j, k] ** 2
            for j in range(L):
                for i in range(K_d):
                    if i == k:
                        continue
                    I_dn += eta_t[j] * P_d * bd[j, j, i] ** 2 * bd[j, l, k] / lam_d[j, i]
            if fd:
                I_dn += P_u * bI[l, k].sum()
                if k < K_f:
                    I_dn -= P_u * bI[l, k, l, k]
                    I_dn += cfg.kappa * P_u * bI[l, k, l, k]
            num = eta_t[l] * P_tr * P_d * M * b_own ** 4 / lam_d[l, k] ** 2
            dl[l, k] = np.log2(1.0 + num / (I_dn + cfg.sigma2_dl))
    return ul, dl


def closed_form_report(profile, cfg, csi, system="fd") -> RateReport:
    """Wrap the Proposition bounds into a RateReport (stderr zero)."""
    if csi == "perfect":
        ul, dl = prop1_rates(profile, cfg, system=system)
    else:
        ul, dl = prop2_rates(profile, cfg, system=system)
    o_ul, o_dl = overheads(cfg, system, csi)
    return RateReport(system=system, csi=csi, ul_rates=ul, dl_rates=dl,
                      ul_stderr=np.zeros_like(ul), dl_stderr=np.zeros_like(dl),
                      overhead_ul=o_ul, overhead_dl=o_dl, n_trials=0)


def homogeneous_rates(h: HomogeneousConfig, csi: str, M: int | None = None):
    """Per-cell (uplink SE, downlink SE) of the homogeneous all-FD network.

    These are the algebraically reduced forms of the Proposition bounds; the
    reduction identity is checked against prop1/prop2 in the test suite.
    """
    M = h.M if M is None else M
    L, K, beta = h.L, h.K, h.beta
    P_u, P_d, P_tr, kap, T, tau = h.P_u, h.P_d, h.P_tr, h.kappa, h.T, h.tau
    if csi == "perfect":
        ul = K * math.log2(1 + P_u * (M - 1) / (
            P_u * (K - 1) + (L - 1) * beta * (P_u * K + P_d) + kap * P_d + 1))
        V = M * K * (K - 1 + (L - 1) * K * beta) * P_u
        dl = K * math.log2(1 + P_d * (M - 1) * (M - 2) / (
            P_d * (K - 1) * (M - 2) + M * K * (L - 1) * beta * P_d + V
            + M * K * (kap * P_u + 1)))
        return ul, dl
    Lbar = 1 + (L - 1) * beta
    pref = K * (T - tau) / T
    J = (P_d * (1 + P_tr * Lbar) * (Lbar - 1) + P_u * K * Lbar
         + P_tr * (1 + kap * P_d) * Lbar + kap * P_d + 1)
    ul = pref * math.log2(1 + P_tr * P_u * (M - 1) / (
        P_tr * P_u * (K * Lbar ** 2 - 1 + beta * (Lbar - 1) * M) + J))
    U1 = (P_d * (1 + (K - 1) * Lbar)
          + K * (P_u * (K - 1) + P_u * (Lbar - 1) * K + 1 + kap * P_u))
    U2 = P_tr * P_d * (M * beta + Lbar) + P_d
    dl = pref * math.log2(1 + P_tr * P_d * M / (
        (1 + P_tr * Lbar) * U1 + (Lbar - 1) * U2))
    return ul, dl


def asymptotic_rates(profile: LargeScaleProfile, cfg: SystemConfig,
                     schedule: PowerScalingSchedule):
    """Large-antenna limit rates under the matching power-scaling law."""
    L = profile.L
    jj = np.arange(L)
    E_u, E_d, E_tr = schedule.E_u, schedule.E_d, schedule.E_tr
    s2 = cfg.sigma2
    s2_dl = cfg.sigma2_dl
    bu_own = profile.beta_u[jj, jj]           # (L, K_u)
    bd_own = profile.beta_d[jj, jj]           # (L, K_d)
    if schedule.exponent == "perfect_csi_1_over_M":
        ul = np.log2(1.0 + bu_own * E_u / s2)
        dl = np.log2(1.0 + bd_own ** 2 * E_d
                     / (bd_own.sum(axis=1, keepdims=True) * s2_dl))
        return ul, dl
    if schedule.exponent != "imperfect_csi_1_over_sqrtM":
        raise ValueError("schedule must use the 1/M or 1/sqrt(M) law")
    contam_u = (profile.beta_u ** 2).sum(axis=1) - bu_own ** 2    # sum_{l!=j}
    ul = np.log2(1.0 + E_tr * E_u * bu_own ** 2
                 / (E_tr * E_u * contam_u + s2 ** 2))
    Z = (bd_own ** 2).sum(axis=1) / s2                            # (L,)
    K_d = profile.K_d
    dl = np.empty((L, K_d))
    for l in range(L):
        for k in range(K_d):
            contam = sum(E_tr * E_d * profile.beta_d[j, j, k] ** 2
                         * profile.beta_d[j, l, k] ** 2 / Z[j]
                         for j in range(L) if j != l)
            dl[l, k] = np.log2(1.0 + E_tr * E_d * profile.beta_d[l, l, k] ** 4
                               / (Z[l] * (contam + s2 ** 3)))
    return ul, dl


@dataclass(frozen=True)
class GainReport:
    """FD over TDD sum spectral-efficiency ratios."""

    gain_ul: float
    gain_dl: float
    M: int
    csi: str
    asymptote_ul: float
    asymptote_dl: float


def asymptotic_gain_limits(cfg: SystemConfig, csi: str) -> tuple[float, float]:
    if csi == "perfect":
        return 2.0, 2.0
    return (2.0 * (1.0 - cfg.K_h_d / (cfg.T - cfg.K_u)),
            2.0 * (1.0 - cfg.K_h_u / (cfg.T - cfg.K_d)))


def fd_gain(fd_report: RateReport, tdd_report: RateReport,
            cfg: SystemConfig) -> GainReport:
    """Ratio of FD to TDD sum spectral efficiency, overheads included."""
    if fd_report.ul_rates.shape != tdd_report.ul_rates.shape:
        raise ValueError("mismatched user populations")
    tdd_ul = tdd_report.ul_se_per_cell.sum()
    tdd_dl = tdd_report.dl_se_per_cell.sum()
    if tdd_ul <= 0 or tdd_dl <= 0:
        raise ZeroDivisionError("TDD spectral efficiency is zero")
    a_ul, a_dl = asymptotic_gain_limits(cfg, fd_report.csi)
    return GainReport(gain_ul=fd_report.ul_se_per_cell.sum() / tdd_ul,
                      gain_dl=fd_report.dl_se_per_cell.sum() / tdd_dl,
                      M=cfg.M, csi=fd_report.csi,
                      asymptote_ul=a_ul, asymptote_dl=a_dl)


def wishart_inverse_moments(m: int, n: int) -> tuple[float, float]:
    """E[tr W^-1] and E[tr W^-2] of a central complex Wishart W_m(n, I)."""
    if n <= m:
        raise ValueError("first inverse moment requires n > m")
    if n <= m + 1:
        raise ValueError("second inverse moment requires n > m + 1")
    d = n - m
    return m / d, m * n / (d ** 3 - d)


@dataclass(frozen=True)
class TradeoffPoint:
    M_tdd: int
    M_fd: int
    se_gain: float
    antenna_reduction: float
    reachable: bool = True


def _fd_sum_se(h: HomogeneousConfig, csi: str, M: int) -> float:
    ul, dl = homogeneous_rates(h, csi, M=M)
    return ul + dl


def _tdd_sum_se(h: HomogeneousConfig, csi: str, M: int) -> float:
    cfg = h.system_config(M=M)
    profile = expand_homogeneous(h)
    rep = closed_form_report(profile, cfg, csi, system="tdd")
    return float(rep.ul_se_per_cell.sum() + rep.dl_se_per_cell.sum()) / h.L


def antenna_reduction_curve(h: HomogeneousConfig, M_tdd_list, csi: str,
                            gains=None, M_max: int = 10_000_000):
    """For each TDD antenna count and target gain, the smallest FD antenna
    count whose spectral efficiency reaches gain x TDD."""
    points = []
    for M_tdd in M_tdd_list:
        se_tdd = _tdd_sum_se(h, csi, M_tdd)
        target_gains = gains
        if target_gains is None:
            g_eq = _fd_sum_se(h, csi, M_tdd) / se_tdd
            target_gains = np.linspace(1.0, g_eq, 8)
        for g in target_gains:
            target = g * se_tdd
            if _fd_sum_se(h, csi, M_max) < target:
                points.append(TradeoffPoint(M_tdd=M_tdd, M_fd=M_max, se_gain=g,
                                            antenna_reduction=M_tdd / M_max,
                                            reachable=False))
                continue
            lo, hi = 3, M_max
            # rates are monotone nondecreasing in M; bisect for the minimum
            while lo < hi:
                mid = (lo + hi) // 2
                if _fd_sum_se(h, csi, mid) >= target:
                    hi = mid
                else:
                    lo = mid + 1
            points.append(TradeoffPoint(M_tdd=M_tdd, M_fd=lo, se_gain=float(g),
                                        antenna_reduction=M_tdd / lo))
    return points
