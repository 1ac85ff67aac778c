"""System parameters, large-scale fading profiles and canonical configurations.

All powers are stored in linear watts.  dB / dBm values appear only at the
config-file boundary (keys suffixed ``_db`` / ``_dbm``) and are converted once
on load.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

_SCALING_LAWS = ("perfect_csi_1_over_M", "imperfect_csi_1_over_sqrtM", "none")


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def dbm_to_watt(x_dbm):
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of the multi-cell network.

    sigma2 is the receiver noise variance at the BS side (uplink data and
    uplink training).  sigma2_dl is the noise variance at the UE side; it
    defaults to sigma2 when not given.
    """

    L: int
    M: int
    K_f: int
    K_h_u: int
    K_h_d: int
    P_u: float
    P_d: float
    P_tr: float
    kappa: float
    sigma2: float
    T: int
    tau: int | None = None
    tau_u: int | None = None
    tau_d: int | None = None
    sigma2_dl: float | None = None

    def __post_init__(self):
        # Minimal pilot lengths are the defaults used by the asymptotic results.
        if self.tau is None:
            object.__setattr__(self, "tau", self.K_tot)
        if self.tau_u is None:
            object.__setattr__(self, "tau_u", self.K_u)
        if self.tau_d is None:
            object.__setattr__(self, "tau_d", self.K_d)
        if self.sigma2_dl is None:
            object.__setattr__(self, "sigma2_dl", self.sigma2)

    @property
    def K_u(self) -> int:
        return self.K_f + self.K_h_u

    @property
    def K_d(self) -> int:
        return self.K_f + self.K_h_d

    @property
    def K_tot(self) -> int:
        return self.K_u + self.K_d - self.K_f

    def replace(self, **kwargs) -> "SystemConfig":
        return dataclasses.replace(self, **kwargs)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple = ()
    warnings: tuple = ()


def validate(cfg: SystemConfig, closed_forms: bool = False) -> ValidationResult:
    """Check every SystemConfig invariant.

    Set ``closed_forms=True`` when the Proposition-style lower bounds will be
    evaluated; their derivation needs M >= 3.
    """
    bad = []
    warn = []
    for name in ("L", "M", "T"):
        if getattr(cfg, name) < 1:
            bad.append(f"{name}: positive integer required")
    for name in ("K_f", "K_h_u", "K_h_d"):
        if getattr(cfg, name) < 0:
            bad.append(f"{name}: nonnegative integer required")
    for name in ("P_u", "P_d", "P_tr", "sigma2", "sigma2_dl"):
        if getattr(cfg, name) <= 0:
            bad.append(f"{name}: strictly positive power required")
    if not 0.0 <= cfg.kappa < 1.0:
        bad.append("kappa: value in [0, 1) required")
    elif cfg.kappa > 0.1:
        warn.append("kappa: above 0.1, dynamic-range model assumes kappa << 1")
    if cfg.tau < cfg.K_tot:
        bad.append("tau: tau >= K_tot required")
    if cfg.tau_u < cfg.K_u:
        bad.append("tau_u: tau_u >= K_u required")
    if cfg.tau_d < cfg.K_d:
        bad.append("tau_d: tau_d >= K_d required")
    for name in ("tau", "tau_u", "tau_d"):
        if getattr(cfg, name) >= cfg.T:
            bad.append(f"{name}: {name} < T required")
    if closed_forms and cfg.M < 3:
        bad.append("M: M >= 3 required for closed-form lower bounds")
    return ValidationResult(ok=not bad, violations=tuple(bad), warnings=tuple(warn))


@dataclass(frozen=True)
class LargeScaleProfile:
    """The four families of large-scale gains for an L-cell network.

    beta_u[j, l, n]  gain between uplink user n of cell l and BS j.
    beta_d[j, l, k]  gain between downlink user k of cell l and BS j.
    beta_b[j, l]     BS-BS gain; the diagonal is the BS self-interference gain.
    beta_I[l, k, j, n]  gain between uplink user n of cell j and downlink
                        user k of cell l; [l, k, l, k] with k < K_f is the UE
                        self-interference gain.
    """

    beta_u: np.ndarray
    beta_d: np.ndarray
    beta_b: np.ndarray
    beta_I: np.ndarray
    K_f: int = 0

    def __post_init__(self):
        object.__setattr__(self, "beta_u", np.asarray(self.beta_u, dtype=float))
        object.__setattr__(self, "beta_d", np.asarray(self.beta_d, dtype=float))
        object.__setattr__(self, "beta_b", np.asarray(self.beta_b, dtype=float))
        object.__setattr__(self, "beta_I", np.asarray(self.beta_I, dtype=float))
        L, _, K_u = self.beta_u.shape
        K_d = self.beta_d.shape[2]
        if self.beta_d.shape != (L, L, K_d) or self.beta_b.shape != (L, L):
            raise ValueError("inconsistent profile array shapes")
        if self.beta_I.shape != (L, K_d, L, K_u):
            raise ValueError("beta_I must have shape (L, K_d, L, K_u)")
        for arr, name in ((self.beta_u, "beta_u"), (self.beta_d, "beta_d"),
                          (self.beta_b, "beta_b"), (self.beta_I, "beta_I")):
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValueError(f"{name}: entries must be strictly positive and finite")
        if self.K_f:
            for j in range(L):
                if not np.allclose(self.beta_u[j, j, :self.K_f],
                                   self.beta_d[j, j, :self.K_f], rtol=0, atol=0):
                    raise ValueError("reciprocity: beta_u[j,j,i] must equal "
                                     "beta_d[j,j,i] for full-duplex users")

    @property
    def L(self) -> int:
        return self.beta_b.shape[0]

    @property
    def K_u(self) -> int:
        return self.beta_u.shape[2]

    @property
    def K_d(self) -> int:
        return self.beta_d.shape[2]


@dataclass(frozen=True)
class HomogeneousConfig:
    """All-full-duplex network where every same-cell gain is 1 and every
    cross-cell gain is beta; noise variance is fixed to 1."""

    L: int
    K: int
    beta: float
    M: int
    P_u: float
    P_d: float
    P_tr: float
    kappa: float
    T: int
    tau: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.tau is None:
            object.__setattr__(self, "tau", self.K)

    def system_config(self, M: int | None = None) -> SystemConfig:
        return SystemConfig(
            L=self.L, M=self.M if M is None else M,
            K_f=self.K, K_h_u=0, K_h_d=0,
            P_u=self.P_u, P_d=self.P_d, P_tr=self.P_tr,
            kappa=self.kappa, sigma2=1.0, T=self.T, tau=self.tau,
        )


def expand_homogeneous(h: HomogeneousConfig) -> LargeScaleProfile:
    """Expand the two-parameter homogeneous statistics into a full profile."""
    L, K = h.L, h.K
    off = np.full((L, L), h.beta)
    np.fill_diagonal(off, 1.0)
    beta_u = np.repeat(off[:, :, None], K, axis=2)
    beta_b = off.copy()
    beta_I = np.repeat(np.repeat(off[:, None, :, None], K, axis=1), K, axis=3)
    return LargeScaleProfile(beta_u=beta_u, beta_d=beta_u.copy(),
                             beta_b=beta_b, beta_I=beta_I, K_f=K)


@dataclass(frozen=True)
class PowerScalingSchedule:
    """Map the antenna count to transmit powers under a scaling law."""

    E_u: float
    E_d: float
    E_tr: float
    exponent: str = "none"

    def __post_init__(self):
        if self.exponent not in _SCALING_LAWS:
            raise ValueError(f"unknown scaling law {self.exponent!r}")

    def powers_at(self, M: int) -> tuple[float, float, float]:
        if self.exponent == "perfect_csi_1_over_M":
            s = 1.0 / M
        elif self.exponent == "imperfect_csi_1_over_sqrtM":
            s = 1.0 / np.sqrt(M)
        else:
            s = 1.0
        return self.E_u * s, self.E_d * s, self.E_tr * s

    def apply(self, cfg: SystemConfig, M: int) -> SystemConfig:
        P_u, P_d, P_tr = self.powers_at(M)
        return cfg.replace(M=M, P_u=P_u, P_d=P_d, P_tr=P_tr)


def _convert_units(raw: dict) -> dict:
    """Convert *_db / *_dbm keys to linear values, recursively."""
    out = {}
    for key, val in raw.items():
        if isinstance(val, dict):
            out[key] = _convert_units(val)
        elif key.endswith("_dbm"):
            out[key[:-4]] = float(dbm_to_watt(val))
        elif key.endswith("_db"):
            out[key[:-3]] = float(db_to_linear(val))
        else:
            out[key] = val
    return out


def system_config_from_dict(raw: dict) -> SystemConfig:
    data = _convert_units(raw)
    names = {f.name for f in dataclasses.fields(SystemConfig)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return SystemConfig(**data)


def load_system_config(path) -> SystemConfig:
    with open(path) as fh:
        return system_config_from_dict(json.load(fh))


def config_digest(obj) -> str:
    """Stable hex digest of any JSON-serializable configuration object."""
    import hashlib

    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    blob = json.dumps(obj, sort_keys=True, default=_json_default).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _json_default(o):
    if dataclasses.is_dataclass(o) and not isinstance(o, type):
        return dataclasses.asdict(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer, np.floating)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o)!r}")
