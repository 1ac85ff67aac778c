"""Geometry, pathloss and small-scale channel generation.

Pathloss constants are configuration data: the defaults in
:mod:`fdmimo.scenario` follow 3GPP TR 36.828-style small-cell models, but any
(A, B) pair can be supplied.  Distances are in meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import LargeScaleProfile, SystemConfig

LINK_CLASSES = ("BS_UE", "BS_BS", "UE_UE", "SELF")


@dataclass(frozen=True)
class PathlossModel:
    """Log-distance pathloss: loss_dB(d) = A + B * log10(d_m).

    The SELF class ignores distance and applies only ``extra_loss`` (used for
    self-interference links where the loss is an isolation figure).
    """

    A: float
    B: float
    shadowing_std: float = 0.0
    extra_loss: float = 0.0
    link_class: str = "BS_UE"

    def __post_init__(self):
        if self.link_class not in LINK_CLASSES:
            raise ValueError(f"unknown link class {self.link_class!r}")
        if self.link_class != "SELF" and self.B <= 0:
            raise ValueError("B must be positive for propagation classes")


def compose_large_scale(pl: PathlossModel, distance: float = 0.0,
                        shadow_draw: float = 0.0, antenna_gain: float = 0.0) -> float:
    """Combine pathloss, shadowing and antenna gain into a linear gain."""
    if pl.link_class == "SELF":
        loss_db = pl.extra_loss
        return 10.0 ** (-loss_db / 10.0)
    if distance <= 0:
        raise ValueError("distance must be positive for propagation links")
    loss_db = pl.A + pl.B * math.log10(distance)
    total_db = -loss_db + antenna_gain - pl.extra_loss + shadow_draw
    return 10.0 ** (total_db / 10.0)


@dataclass(frozen=True)
class Topology:
    """BS and UE positions of one random drop."""

    bs_positions: np.ndarray             # (n_bs, 2)
    ul_ue_positions: np.ndarray          # (n_bs, n_ul, 2)
    dl_ue_positions: np.ndarray          # (n_bs, n_dl, 2)
    region_radius: float

    @property
    def n_bs(self) -> int:
        return self.bs_positions.shape[0]


class TopologyError(RuntimeError):
    """Raised when the minimum-distance constraints cannot be satisfied."""


def _in_hexagon(pts: np.ndarray, radius: float) -> np.ndarray:
    """Membership test for a pointy-top regular hexagon of circumradius R."""
    x = np.abs(pts[..., 0])
    y = np.abs(pts[..., 1])
    return (x <= radius * math.sqrt(3) / 2) & (y <= radius - x / math.sqrt(3))


def sample_hexagon(rng: np.random.Generator, radius: float, n: int) -> np.ndarray:
    """Uniform points in a hexagon by rejection from the bounding box."""
    out = np.empty((n, 2))
    got = 0
    while got < n:
        cand = rng.uniform([-radius * math.sqrt(3) / 2, -radius],
                           [radius * math.sqrt(3) / 2, radius],
                           size=(2 * (n - got) + 8, 2))
        cand = cand[_in_hexagon(cand, radius)]
        take = min(len(cand), n - got)
        out[got:got + take] = cand[:take]
        got += take
    return out


def _place_with_min_dist(rng, draw_one, others, min_dists, budget=100_000):
    """Rejection-sample one point keeping all minimum distances.

    others / min_dists: list of (points array, required distance) pairs.
    """
    for _ in range(budget):
        p = draw_one()
        ok = True
        for pts, dmin in zip(others, min_dists):
            if len(pts) and np.min(np.hypot(*(pts - p).T)) < dmin:
                ok = False
                break
        if ok:
            return p
    raise TopologyError("minimum-distance constraints unsatisfiable within retry budget")


def build_topology(rng, n_bs: int, hex_radius: float,
                   n_ul_per_bs: int, n_dl_per_bs: int,
                   ue_drop_radius: float = 40.0,
                   min_bs_bs: float = 40.0, min_bs_ue: float = 10.0,
                   min_ue_ue: float = 3.0) -> Topology:
    """Random drop: BSs uniform in the hexagon, UEs uniform in a disc around
    their serving BS, all Table-style minimum distances enforced."""
    rng = np.random.default_rng(rng)
    bs = []
    for _ in range(n_bs):
        p = _place_with_min_dist(
            rng, lambda: sample_hexagon(rng, hex_radius, 1)[0],
            [np.asarray(bs).reshape(-1, 2)], [min_bs_bs])
        bs.append(p)
    bs = np.asarray(bs)

    def draw_ue(center):
        def one():
            while True:
                q = rng.uniform(-ue_drop_radius, ue_drop_radius, size=2)
                r = math.hypot(*q)
                if min_bs_ue <= r <= ue_drop_radius:
                    return center + q
        return one

    ues = []
    all_ue = []
    for cell in range(n_bs):
        placed = []
        for _ in range(n_ul_per_bs + n_dl_per_bs):
            p = _place_with_min_dist(
                rng, draw_ue(bs[cell]),
                [bs, np.asarray(all_ue).reshape(-1, 2)],
                [min_bs_ue, min_ue_ue])
            placed.append(p)
            all_ue.append(p)
        ues.append(placed)
    ues = np.asarray(ues)
    return Topology(bs_positions=bs,
                    ul_ue_positions=ues[:, :n_ul_per_bs],
                    dl_ue_positions=ues[:, n_ul_per_bs:],
                    region_radius=hex_radius)


@dataclass(frozen=True)
class ChannelRealization:
    """One coherence-block draw of every small-scale channel.

    G_u[j, l]  M x K_u  uplink users of cell l seen at BS j.
    G_d[j, l]  M x K_d  downlink users of cell l seen at BS j.
    V[j, l]    M x M    BS l seen at BS j (diagonal block: SI channel).
    F[l, :, j, :]  K_d x K_u  uplink users of cell j at downlink users of cell l.
    """

    G_u: np.ndarray     # (L, L, M, K_u)
    G_d: np.ndarray     # (L, L, M, K_d)
    V: np.ndarray       # (L, L, M, M)
    F: np.ndarray       # (L, K_d, L, K_u)
    K_f: int


def draw_cn(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. circularly-symmetric CN(0,1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def realize_channels(profile: LargeScaleProfile, rng, M: int) -> ChannelRealization:
    """Draw all channel matrices for one coherence block.

    Deterministic for a given rng seed.  Full-duplex users' same-cell uplink
    and downlink columns are copies of each other (reciprocity), not redrawn.
    """
    rng = np.random.default_rng(rng)
    L, K_u, K_d, K_f = profile.L, profile.K_u, profile.K_d, profile.K_f
    G_u = draw_cn(rng, (L, L, M, K_u)) * np.sqrt(profile.beta_u[:, :, None, :])
    G_d = draw_cn(rng, (L, L, M, K_d)) * np.sqrt(profile.beta_d[:, :, None, :])
    for j in range(L):
        G_d[j, j, :, :K_f] = G_u[j, j, :, :K_f]
    V = draw_cn(rng, (L, L, M, M)) * np.sqrt(profile.beta_b[:, :, None, None])
    F = draw_cn(rng, (L, K_d, L, K_u)) * np.sqrt(profile.beta_I)
    return ChannelRealization(G_u=G_u, G_d=G_d, V=V, F=F, K_f=K_f)


def trial_rng(seed, trial: int) -> np.random.Generator:
    """Independent, reproducible stream for one Monte Carlo trial.

    seed may be an integer or a SeedSequence; the stream depends only on
    (seed, trial), never on scheduling.
    """
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(entropy=seed.entropy,
                                    spawn_key=seed.spawn_key + (trial,))
    else:
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    return np.random.default_rng(ss)
