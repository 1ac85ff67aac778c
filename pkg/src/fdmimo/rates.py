"""Instantaneous SINRs and Monte Carlo ergodic rates.

Uplink uses maximum ratio combining; downlink uses conjugate beamforming.
All interference is treated as noise.  The full-duplex downlink rate under
imperfect CSI is a deterministic expression in channel moments and is
evaluated analytically (see :func:`dl_rates_fd_imperfect`); everything else is
averaged over channel realizations.

The Monte Carlo drivers never materialize the M x M BS-BS matrices: for a
combining vector w fixed by the realization, V^H w has i.i.d. CN(0, beta_b
|w|^2) entries independent of everything else, so an equivalent M-vector is
drawn directly.  Per-user rate distributions are unchanged.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, draw_cn, trial_rng
from .config import LargeScaleProfile, SystemConfig, validate
from .estimation import ChannelEstimateSet, estimation_stats


@dataclass(frozen=True)
class PerCellFactors:
    """Precoder normalizations and their reciprocals used by the bounds."""

    gamma: np.ndarray          # M * sum_k beta_d[l,l,k] / K_d
    gamma_tilde: np.ndarray    # (M/K_d) * sum_i P_tr beta^2 / lambda
    eta: np.ndarray            # 1 / (M * sum_i beta_d[l,l,i])
    eta_tilde: np.ndarray      # (sum_i beta^2 / lambda)^-1


def per_cell_factors(profile: LargeScaleProfile, cfg: SystemConfig) -> PerCellFactors:
    L = profile.L
    jj = np.arange(L)
    beta_own = profile.beta_d[jj, jj]                   # (L, K_d)
    lam_d = estimation_stats(profile, cfg).lam_d
    s = (beta_own ** 2 / lam_d).sum(axis=1)
    gamma = cfg.M * beta_own.sum(axis=1) / profile.K_d
    gamma_tilde = cfg.M * cfg.P_tr * s / profile.K_d
    return PerCellFactors(gamma=gamma, gamma_tilde=gamma_tilde,
                          eta=1.0 / (cfg.M * beta_own.sum(axis=1)),
                          eta_tilde=1.0 / s)


# ---------------------------------------------------------------------------
# Single-realization SINRs (reference implementations, loop-based)
# ---------------------------------------------------------------------------

def ul_sinr_fd_perfect(real: ChannelRealization, cfg: SystemConfig,
                       factors: PerCellFactors, profile: LargeScaleProfile,
                       j: int, n: int) -> float:
    """Uplink SINR of user n at BS j with perfect CSI and MRC."""
    g = real.G_u[j, j, :, n]
    nrm2 = float(np.vdot(g, g).real)
    if nrm2 == 0.0:
        raise ZeroDivisionError("zero-norm channel vector")
    num = cfg.P_u * nrm2 ** 2
    cross = 0.0
    L, K_u, K_d = profile.L, profile.K_u, profile.K_d
    for l in range(L):
        for m in range(K_u):
            if (l, m) == (j, n):
                continue
            cross += abs(np.vdot(g, real.G_u[j, l, :, m])) ** 2
    bsbs = 0.0
    for l in range(L):
        if l == j:
            continue
        coef = cfg.P_d / (K_d * factors.gamma[l])
        for k in range(K_d):
            bsbs += coef * abs(g.conj() @ real.V[j, l] @ real.G_d[l, l, :, k].conj()) ** 2
    noise = nrm2 * (cfg.sigma2 + cfg.kappa * cfg.P_d * profile.beta_b[j, j])
    return num / (cfg.P_u * cross + bsbs + noise)


def dl_sinr_fd_perfect(real: ChannelRealization, cfg: SystemConfig,
                       factors: PerCellFactors, profile: LargeScaleProfile,
                       l: int, k: int, user_class: str) -> float:
    """Downlink SINR of user k in cell l; user_class is "FD" or "HD"."""
    K_f, K_d, K_u, L = real.K_f, profile.K_d, profile.K_u, profile.L
    if user_class == "FD" and not k < K_f:
        raise IndexError("FD class requires k < K_f")
    if user_class == "HD" and not K_f <= k < K_d:
        raise IndexError("HD class requires K_f <= k < K_d")
    g = real.G_d[l, l, :, k]
    nrm2 = float(np.vdot(g, g).real)
    if nrm2 == 0.0:
        raise ZeroDivisionError("zero-norm channel vector")
    num = cfg.P_d / (K_d * factors.gamma[l]) * nrm2 ** 2
    cross = 0.0
    for j in range(L):
        coef = cfg.P_d / (K_d * factors.gamma[j])
        for i in range(K_d):
            if (j, i) == (l, k):
                continue
            cross += coef * abs(real.G_d[j, l, :, k] @ real.G_d[j, j, :, i].conj()) ** 2
    ue = 0.0
    for j in range(L):
        for n in range(K_u):
            if user_class == "FD" and (j, n) == (l, k):
                continue        # own term cancelled by UE self-interference removal
            ue += cfg.P_u * abs(real.F[l, k, j, n]) ** 2
    if user_class == "FD":
        noise = cfg.sigma2_dl + cfg.kappa * cfg.P_u * profile.beta_I[l, k, l, k]
    else:
        noise = cfg.sigma2_dl
    return num / (cross + ue + noise)


def ul_sinr_fd_imperfect(real: ChannelRealization, est: ChannelEstimateSet,
                         cfg: SystemConfig, factors: PerCellFactors,
                         profile: LargeScaleProfile, j: int, n: int) -> float:
    """Uplink SINR with MMSE estimates treated as the true channel."""
    gh = est.g_hat_u[j, :, n]
    eps = real.G_u[j, j, :, n] - gh
    nrm2 = float(np.vdot(gh, gh).real)
    num = cfg.P_u * nrm2 ** 2
    L, K_u, K_d = profile.L, profile.K_u, profile.K_d
    err = cfg.P_u * abs(np.vdot(gh, eps)) ** 2
    cross = 0.0
    for l in range(L):
        for m in range(K_u):
            if (l, m) == (j, n):
                continue
            cross += abs(np.vdot(gh, real.G_u[j, l, :, m])) ** 2
    bsbs = 0.0
    for l in range(L):
        if l == j:
            continue
        coef = cfg.P_d / (K_d * factors.gamma_tilde[l])
        for k in range(K_d):
            bsbs += coef * abs(gh.conj() @ real.V[j, l] @ est.g_hat_d[l, :, k].conj()) ** 2
    noise = nrm2 * (cfg.sigma2 + cfg.kappa * cfg.P_d * profile.beta_b[j, j])
    return num / (err + cfg.P_u * cross + bsbs + noise)


# ---------------------------------------------------------------------------
# Rate reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateReport:
    """Per-user ergodic rates plus per-cell spectral efficiencies.

    ul_rates / dl_rates hold E[log2(1+SINR)] without any prefactor; the
    training-overhead and half-duplex time-sharing prefactors live in
    overhead_ul / overhead_dl and are already applied to the per-cell SEs.
    """

    system: str
    csi: str
    ul_rates: np.ndarray        # (L, K_u)
    dl_rates: np.ndarray        # (L, K_d)
    ul_stderr: np.ndarray
    dl_stderr: np.ndarray
    overhead_ul: float
    overhead_dl: float
    n_trials: int

    @property
    def ul_se_per_cell(self) -> np.ndarray:
        return self.overhead_ul * self.ul_rates.sum(axis=1)

    @property
    def dl_se_per_cell(self) -> np.ndarray:
        return self.overhead_dl * self.dl_rates.sum(axis=1)

    def rows(self):
        out = []
        for (j, n), r in np.ndenumerate(self.ul_rates):
            out.append({"system": self.system, "csi": self.csi, "cell": j,
                        "user": n, "class": "ul", "rate": r,
                        "stderr": self.ul_stderr[j, n]})
        for (l, k), r in np.ndenumerate(self.dl_rates):
            out.append({"system": self.system, "csi": self.csi, "cell": l,
                        "user": k, "class": "dl", "rate": r,
                        "stderr": self.dl_stderr[l, k]})
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["system", "csi", "cell", "user",
                                               "class", "rate", "stderr"])
            w.writeheader()
            for row in self.rows():
                row = dict(row, rate=repr(float(row["rate"])),
                           stderr=repr(float(row["stderr"])))
                w.writerow(row)

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump({"system": self.system, "csi": self.csi,
                       "n_trials": self.n_trials,
                       "overhead_ul": self.overhead_ul,
                       "overhead_dl": self.overhead_dl,
                       "rows": self.rows()}, fh, indent=1, sort_keys=True)


def overheads(cfg: SystemConfig, system: str, csi: str) -> tuple[float, float]:
    if system == "fd":
        if csi == "perfect":
            return 1.0, 1.0
        f = (cfg.T - cfg.tau) / cfg.T
        return f, f
    if csi == "perfect":
        return 0.5, 0.5
    return 0.5 * (cfg.T - cfg.tau_u) / cfg.T, 0.5 * (cfg.T - cfg.tau_d) / cfg.T


# ---------------------------------------------------------------------------
# Batched Monte Carlo engine
# ---------------------------------------------------------------------------

def _draw_trials(profile, cfg, rng, B, need_est, tdd_pilots):
    """Draw a batch of B coherence blocks (and estimates when requested)."""
    L, K_u, K_d, K_f, M = profile.L, profile.K_u, profile.K_d, profile.K_f, cfg.M
    Gu = draw_cn(rng, (B, L, L, M, K_u)) * np.sqrt(profile.beta_u[:, :, None, :])
    Gd = draw_cn(rng, (B, L, L, M, K_d)) * np.sqrt(profile.beta_d[:, :, None, :])
    jj = np.arange(L)
    Gd[:, jj, jj, :, :K_f] = Gu[:, jj, jj, :, :K_f]
    F = draw_cn(rng, (B, L, K_d, L, K_u)) * np.sqrt(profile.beta_I)
    out = {"Gu": Gu, "Gd": Gd, "F": F}
    if not need_est:
        return out
    st = estimation_stats(profile, cfg)
    own_u = profile.beta_u[jj, jj]                       # (L, K_u)
    own_d = profile.beta_d[jj, jj]
    cu = (cfg.P_tr * own_u / st.lam_u)[None, :, None, :]  # (1, L, 1, K_u)
    cd = (cfg.P_tr * own_d / st.lam_d)[None, :, None, :]
    scale = math.sqrt(cfg.sigma2 / cfg.P_tr)
    Yu = Gu.sum(axis=2) + scale * draw_cn(rng, (B, L, M, K_u))
    Ghu = cu * Yu
    Yd = Gd.sum(axis=2) + scale * draw_cn(rng, (B, L, M, K_d))
    Ghd = cd * Yd
    if not tdd_pilots:
        # Full-duplex training: one shared pilot per FD user.
        Ghd[..., :K_f] = Ghu[..., :K_f]
    out["Ghu"] = Ghu
    out["Ghd"] = Ghd
    out["Eps"] = Gu[:, jj, jj] - Ghu
    return out


def _batch_ul_logrates(d, profile, cfg, factors, system, csi, rng):
    """log2(1+SINR) for every uplink user in a batch; shape (B, L, K_u)."""
    L, K_u, K_d = profile.L, profile.K_u, profile.K_d
    B = d["Gu"].shape[0]
    out = np.empty((B, L, K_u))
    imperfect = csi == "imperfect"
    if system == "fd":
        Z = draw_cn(rng, (B, L, L, cfg.M, K_u))
        coef_dl = cfg.P_d / (K_d * (factors.gamma_tilde if imperfect else factors.gamma))
        pre = d["Ghd"] if imperfect else d["Gd"][:, np.arange(L), np.arange(L)]
    for j in range(L):
        W = d["Ghu"][:, j] if imperfect else d["Gu"][:, j, j]        # (B, M, K_u)
        nrm2 = np.einsum("bmn,bmn->bn", W.conj(), W).real             # (B, K_u)
        Gall = np.moveaxis(d["Gu"][:, j], 1, 2).reshape(B, cfg.M, L * K_u)
        P = np.einsum("bmn,bmx->bnx", W.conj(), Gall)
        own = P[:, np.arange(K_u), j * K_u + np.arange(K_u)]
        cross = (np.abs(P) ** 2).sum(axis=2) - np.abs(own) ** 2
        denom = cfg.P_u * cross
        if imperfect:
            e = np.einsum("bmn,bmn->bn", W.conj(), d["Eps"][:, j])
            denom = denom + cfg.P_u * np.abs(e) ** 2
        if system == "fd":
            for l in range(L):
                if l == j:
                    continue
                S = np.einsum("bmn,bmk->bnk", Z[:, j, l].conj(), pre[:, l].conj())
                denom = denom + (coef_dl[l] * profile.beta_b[j, l]) * nrm2 \
                    * (np.abs(S) ** 2).sum(axis=2)
            noise = cfg.sigma2 + cfg.kappa * cfg.P_d * profile.beta_b[j, j]
        else:
            noise = cfg.sigma2
        sinr = cfg.P_u * nrm2 ** 2 / (denom + nrm2 * noise)
        out[:, j] = np.log2(1.0 + sinr)
    return out


def _batch_dl_logrates(d, profile, cfg, factors, system, csi):
    """log2(1+SINR) for every downlink user in a batch; shape (B, L, K_d).

    Handles perfect CSI (fd and tdd) and tdd/imperfect; fd/imperfect downlink
    is analytic and not simulated here.
    """
    L, K_u, K_d, K_f = profile.L, profile.K_u, profile.K_d, profile.K_f
    B = d["Gd"].shape[0]
    imperfect = csi == "imperfect"
    jj = np.arange(L)
    pre = d["Ghd"] if imperfect else d["Gd"][:, jj, jj]               # (B, L, M, K_d)
    coef = cfg.P_d / (K_d * (factors.gamma_tilde if imperfect else factors.gamma))
    if imperfect:
        st = estimation_stats(profile, cfg)
        Emu = cfg.M * cfg.P_tr * profile.beta_d[jj, jj] ** 2 / st.lam_d   # (L, K_d)
    out = np.empty((B, L, K_d))
    for l in range(L):
        C = np.einsum("bjmk,bjmi->bjki", d["Gd"][:, :, l], pre.conj())    # (B, L, K_d, K_d)
        total = np.einsum("j,bjki->bk", coef, np.abs(C) ** 2)
        own = C[:, l, np.arange(K_d), np.arange(K_d)]                     # (B, K_d)
        cross = total - coef[l] * np.abs(own) ** 2
        if system == "fd":
            ue = cfg.P_u * (np.abs(d["F"][:, l]) ** 2).sum(axis=(2, 3))   # (B, K_d)
            if K_f:
                kk = np.arange(K_f)
                ue[:, :K_f] -= cfg.P_u * np.abs(d["F"][:, l, kk, l, kk]) ** 2
                ue[:, :K_f] += cfg.kappa * cfg.P_u * profile.beta_I[l, kk, l, kk]
        else:
            ue = 0.0
        if imperfect:
            num = coef[l] * Emu[l] ** 2
            wobble = coef[l] * np.abs(own - Emu[l]) ** 2
            sinr = num / (wobble + cross + ue + cfg.sigma2_dl)
        else:
            num = coef[l] * np.abs(own) ** 2
            sinr = num / (cross + ue + cfg.sigma2_dl)
        out[:, l] = np.log2(1.0 + sinr)
    return out


def _mc_rates(profile, cfg, system, csi, trials, seed, batch=64):
    res = validate(cfg)
    if not res.ok:
        raise ValueError("invalid config: " + "; ".join(res.violations))
    need_est = csi == "imperfect"
    do_dl = not (system == "fd" and csi == "imperfect")
    L, K_u, K_d = profile.L, profile.K_u, profile.K_d
    factors = per_cell_factors(profile, cfg)
    sum_u = np.zeros((L, K_u)); sq_u = np.zeros((L, K_u))
    sum_d = np.zeros((L, K_d)); sq_d = np.zeros((L, K_d))
    done = 0
    t = 0
    while done < trials:
        B = min(batch, trials - done)
        rng = trial_rng(seed, t)
        t += 1
        d = _draw_trials(profile, cfg, rng, B, need_est, tdd_pilots=(system == "tdd"))
        lu = _batch_ul_logrates(d, profile, cfg, factors, system, csi, rng)
        sum_u += lu.sum(axis=0); sq_u += (lu ** 2).sum(axis=0)
        if do_dl:
            ld = _batch_dl_logrates(d, profile, cfg, factors, system, csi)
            sum_d += ld.sum(axis=0); sq_d += (ld ** 2).sum(axis=0)
        done += B
    ul = sum_u / trials
    ul_se = np.sqrt(np.maximum(sq_u / trials - ul ** 2, 0.0) / trials)
    if do_dl:
        dl = sum_d / trials
        dl_se = np.sqrt(np.maximum(sq_d / trials - dl ** 2, 0.0) / trials)
    else:
        dl = dl_rates_fd_imperfect(profile, cfg)
        dl_se = np.zeros_like(dl)
    o_ul, o_dl = overheads(cfg, system, csi)
    return RateReport(system=system, csi=csi, ul_rates=ul, dl_rates=dl,
                      ul_stderr=ul_se, dl_stderr=dl_se,
                      overhead_ul=o_ul, overhead_dl=o_dl, n_trials=trials)


def fd_rates_mc(profile, cfg, trials, seed, csi="perfect", batch=64) -> RateReport:
    """Full-duplex ergodic rates; downlink under imperfect CSI is analytic."""
    return _mc_rates(profile, cfg, "fd", csi, trials, seed, batch)


def tdd_rates_mc(profile, cfg, csi, trials, seed, batch=64) -> RateReport:
    """TDD baseline rates, Monte Carlo with no lower-bounding."""
    return _mc_rates(profile, cfg, "tdd", csi, trials, seed, batch)


def ul_rate_fd_imperfect_mc(profile, cfg, trials, seed, batch=64):
    """Uplink rates of the full-duplex system under imperfect CSI (MC only)."""
    rep = fd_rates_mc(profile, cfg, trials, seed, csi="imperfect", batch=batch)
    return rep.ul_rates, rep.ul_stderr


# ---------------------------------------------------------------------------
# Analytic downlink rate under imperfect CSI
# ---------------------------------------------------------------------------

def dl_effective_moments(profile, cfg):
    """Closed-form moments of the effective downlink channel g^T ghat*.

    Returns (Emu, varmu, cross) where Emu/varmu are (L, K_d) for the serving
    link and cross[l, k, j, i] = E|g_{d,jlk}^T ghat*_{d,jji}|^2.
    """
    L, K_d = profile.L, profile.K_d
    jj = np.arange(L)
    st = estimation_stats(profile, cfg)
    lam = st.lam_d                                  # (L, K_d)
    own = profile.beta_d[jj, jj]                    # (L, K_d)
    M, P = cfg.M, cfg.P_tr
    Emu = M * P * own ** 2 / lam
    varmu = M * P * own ** 3 / lam
    cross = np.empty((L, K_d, L, K_d))
    for l in range(L):
        for k in range(K_d):
            for j in range(L):
                b_jlk = profile.beta_d[j, l, k]
                for i in range(K_d):
                    if i == k:
                        if j == l:
                            cross[l, k, j, i] = np.nan   # serving link, not used
                            continue
                        contam = profile.beta_d[j, :, k].sum() - b_jlk
                        cross[l, k, j, i] = (M * P ** 2 * own[j, k] ** 2 / lam[j, k] ** 2) * (
                            (M + 1) * b_jlk ** 2 + contam * b_jlk
                            + b_jlk * cfg.sigma2 / P)
                    else:
                        cross[l, k, j, i] = M * P * own[j, i] ** 2 * b_jlk / lam[j, i]
    return Emu, varmu, cross


def dl_rates_fd_imperfect(profile, cfg, system="fd") -> np.ndarray:
    """Downlink rates under imperfect CSI assembled from channel moments.

    With system="tdd" the UE-UE interference and the full-duplex transmitter
    noise terms are absent.
    """
    L, K_d, K_u, K_f = profile.L, profile.K_d, profile.K_u, profile.K_f
    factors = per_cell_factors(profile, cfg)
    coef = cfg.P_d / (K_d * factors.gamma_tilde)      # (L,)
    Emu, varmu, cross = dl_effective_moments(profile, cfg)
    rates = np.empty((L, K_d))
    for l in range(L):
        for k in range(K_d):
            denom = coef[l] * varmu[l, k] + cfg.sigma2_dl
            for j in range(L):
                for i in range(K_d):
                    if (j, i) == (l, k):
                        continue
                    denom += coef[j] * cross[l, k, j, i]
            if system == "fd":
                ue = cfg.P_u * profile.beta_I[l, k].sum()
                if k < K_f:
                    ue -= cfg.P_u * profile.beta_I[l, k, l, k]
                    ue += cfg.kappa * cfg.P_u * profile.beta_I[l, k, l, k]
                denom += ue
            rates[l, k] = np.log2(1.0 + coef[l] * Emu[l, k] ** 2 / denom)
    return rates
