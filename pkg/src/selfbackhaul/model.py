"""Cell parameters, power allocations and structural validation.

All quantities are stored in linear units internally (powers in mW, path
gains and SI attenuation as dimensionless gains in (0, 1]).  Configuration
files and the public constructors speak dB/dBm, matching how such systems
are usually specified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Mapping


class ConfigError(ValueError):
    """Raised for malformed configuration input (missing keys, bad values)."""


class StructuralError(ValueError):
    """Raised when an operation is asked to run on an invalid configuration."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class Scheme(str, Enum):
    """Transmission scheme of the access node."""

    FULL_DUPLEX = "fd"
    HALF_DUPLEX = "hd"
    HYBRID_RELAY = "rl"

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ConfigError(f"unknown scheme {text!r} (expected fd, hd or rl)")

    @property
    def kernel_id(self) -> int:
        return _KERNEL_IDS[self]


_KERNEL_IDS = {Scheme.FULL_DUPLEX: 0, Scheme.HALF_DUPLEX: 1, Scheme.HYBRID_RELAY: 2}


@dataclass(frozen=True)
class SystemParams:
    """Static cell parameters in linear units.

    Counts are antenna/stream/user counts; ``sigma_n2`` and the ``p_*``
    budgets are in mW; ``l_*`` and ``alpha`` are linear gains.
    """

    n_t: int            # AN transmit antennas
    n_r: int            # AN receive antennas
    m_bh_t: int         # transmitted backhaul streams
    m_bh_r: int         # received backhaul streams
    d: int              # DL UEs
    u: int              # UL UEs
    k_d2d: int          # direct intra-cell pairs
    k_an: int           # AN-relayed intra-cell pairs
    sigma_n2: float     # receiver noise floor, mW
    l_ue: float         # AN <-> UE path gain
    l_ud: float         # UL-UE <-> DL-UE path gain
    l_bh: float         # AN <-> BN path gain
    p_an_max: float     # AN total transmit budget, mW
    p_ue_max: float     # per-UE budget, mW
    p_bh_d_max: float   # BN budget, mW
    alpha: float        # residual SI attenuation (linear)
    rho_min: float      # lower UL/DL rate-ratio bound
    rho_max: float      # upper UL/DL rate-ratio bound

    def kernel_args(self):
        """Positional argument tuple shared by all `_kernels` functions."""
        return (self.n_t, self.n_r, self.m_bh_t, self.m_bh_r,
                self.d, self.u, self.k_d2d, self.k_an,
                self.sigma_n2, self.l_ue, self.l_ud, self.l_bh, self.alpha)

    def with_overrides(self, **kwargs) -> "SystemParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit powers (mW) plus the TDD time split.

    ``eta`` is meaningful for the half-duplex and hybrid relay schemes only;
    full duplex ignores it (kept at 0.5 by convention).  ``p_u_d2d`` must be
    zero when the cell has no direct intra-cell pairs.
    """

    p_d: float          # AN power toward DL UEs
    p_u: float          # per-UE UL power
    p_bh_d: float       # BN power on the incoming backhaul
    p_bh_u: float       # AN power on the outgoing backhaul
    p_u_d2d: float = 0.0
    eta: float = 0.5

    def as_tuple(self):
        return (self.p_d, self.p_u, self.p_bh_d, self.p_bh_u,
                self.p_u_d2d, self.eta)

    def check(self):
        """Raise ValueError on out-of-domain entries."""
        for name, value in (("p_d", self.p_d), ("p_u", self.p_u),
                            ("p_bh_d", self.p_bh_d), ("p_bh_u", self.p_bh_u),
                            ("p_u_d2d", self.p_u_d2d)):
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")


# Configuration keys (dB scale), in canonical file order.
_COUNT_KEYS = ("n_t", "n_r", "m_bh_t", "m_bh_r", "d", "u", "k_d2d", "k_an")
_DB_KEYS = ("noise_dbm", "l_ue_db", "l_ud_db", "l_bh_db",
            "p_an_dbm", "p_ue_dbm", "p_bh_dbm", "si_cancellation_db")
_RATIO_KEYS = ("rho_min", "rho_max")
CONFIG_KEYS = _COUNT_KEYS + _DB_KEYS + _RATIO_KEYS


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


def db_loss_to_gain(db: float) -> float:
    return 10.0 ** (-db / 10.0)


def gain_to_db_loss(gain: float) -> float:
    return -10.0 * math.log10(gain)


def params_from_db(raw: Mapping[str, float]) -> SystemParams:
    """Build SystemParams from a dB/dBm-scale key-value map.

    Powers are given in dBm, path losses and SI cancellation in dB
    (positive numbers; 80 dB loss becomes a 1e-8 linear gain), counts and
    the rate-ratio bounds verbatim.
    """
    missing = [k for k in CONFIG_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing configuration keys: {', '.join(missing)}")

    counts = {}
    for key in _COUNT_KEYS:
        value = raw[key]
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{key} must be an integer count, got {value}")
        value = int(value)
        if value < 0:
            raise ConfigError(f"{key} must be >= 0, got {value}")
        counts[key] = value

    scalars = {}
    for key in _DB_KEYS + _RATIO_KEYS:
        value = float(raw[key])
        if not math.isfinite(value):
            raise ConfigError(f"{key} must be finite, got {value}")
        scalars[key] = value

    return SystemParams(
        sigma_n2=dbm_to_mw(scalars["noise_dbm"]),
        l_ue=db_loss_to_gain(scalars["l_ue_db"]),
        l_ud=db_loss_to_gain(scalars["l_ud_db"]),
        l_bh=db_loss_to_gain(scalars["l_bh_db"]),
        p_an_max=dbm_to_mw(scalars["p_an_dbm"]),
        p_ue_max=dbm_to_mw(scalars["p_ue_dbm"]),
        p_bh_d_max=dbm_to_mw(scalars["p_bh_dbm"]),
        alpha=db_loss_to_gain(scalars["si_cancellation_db"]),
        rho_min=scalars["rho_min"],
        rho_max=scalars["rho_max"],
        **counts,
    )


def params_to_db(params: SystemParams) -> dict:
    """Inverse of params_from_db (round-trips within float accuracy)."""
    out = {key: getattr(params, key) for key in _COUNT_KEYS}
    out["noise_dbm"] = mw_to_dbm(params.sigma_n2)
    out["l_ue_db"] = gain_to_db_loss(params.l_ue)
    out["l_ud_db"] = gain_to_db_loss(params.l_ud)
    out["l_bh_db"] = gain_to_db_loss(params.l_bh)
    out["p_an_dbm"] = mw_to_dbm(params.p_an_max)
    out["p_ue_dbm"] = mw_to_dbm(params.p_ue_max)
    out["p_bh_dbm"] = mw_to_dbm(params.p_bh_d_max)
    out["si_cancellation_db"] = gain_to_db_loss(params.alpha)
    out["rho_min"] = params.rho_min
    out["rho_max"] = params.rho_max
    return out


def validate(params: SystemParams, scheme: Scheme) -> list:
    """Return every violated structural or DoF invariant (empty = valid)."""
    v = []
    p = params

    for key in ("n_t", "n_r", "d", "u"):
        if getattr(p, key) < 1:
            v.append(f"{key} must be >= 1, got {getattr(p, key)}")
    for key in ("m_bh_t", "m_bh_r", "k_d2d", "k_an"):
        if getattr(p, key) < 0:
            v.append(f"{key} must be >= 0, got {getattr(p, key)}")
    if p.k_d2d + p.k_an > p.d:
        v.append(f"k_d2d + k_an > d ({p.k_d2d} + {p.k_an} > {p.d})")
    if p.k_d2d + p.k_an > p.u:
        v.append(f"k_d2d + k_an > u ({p.k_d2d} + {p.k_an} > {p.u})")

    for key in ("l_ue", "l_ud", "l_bh", "alpha"):
        g = getattr(p, key)
        if not (0.0 < g <= 1.0) or not math.isfinite(g):
            v.append(f"{key} must be a linear gain in (0, 1], got {g}")
    for key in ("sigma_n2", "p_an_max", "p_ue_max", "p_bh_d_max"):
        val = getattr(p, key)
        if not (val > 0.0) or not math.isfinite(val):
            v.append(f"{key} must be > 0, got {val}")
    if not (0.0 < p.rho_min <= p.rho_max):
        v.append(f"rho bounds must satisfy 0 < rho_min <= rho_max, "
                 f"got [{p.rho_min}, {p.rho_max}]")

    if scheme is Scheme.FULL_DUPLEX:
        dof_t = p.n_t - p.d - p.m_bh_t - p.n_r
        if dof_t <= 0:
            v.append(f"FD transmit DoF <= 0 (n_t - d - m_bh_t - n_r = {dof_t})")
        dof_r = p.n_r - p.u - p.m_bh_r
        if dof_r <= 0:
            v.append(f"FD receive DoF <= 0 (n_r - u - m_bh_r = {dof_r})")
    elif scheme is Scheme.HALF_DUPLEX:
        dof_t = p.n_t - p.d + p.k_d2d - p.m_bh_t
        if dof_t <= 0:
            v.append(f"HD transmit DoF <= 0 (n_t - d + k_d2d - m_bh_t = {dof_t})")
        dof_r = p.n_r - p.u - p.m_bh_r
        if dof_r <= 0:
            v.append(f"HD receive DoF <= 0 (n_r - u - m_bh_r = {dof_r})")
    else:
        dof_dl = p.n_t - p.d + p.k_d2d - p.n_r
        if dof_dl <= 0:
            v.append(f"RL DL transmit DoF <= 0 (n_t - d + k_d2d - n_r = {dof_dl})")
        dof_bh = p.n_t - p.m_bh_t - p.k_d2d - p.n_r
        if dof_bh <= 0:
            v.append("RL backhaul transmit DoF <= 0 "
                     f"(n_t - m_bh_t - k_d2d - n_r = {dof_bh})")
        dof_ul = p.n_r - p.u
        if dof_ul <= 0:
            v.append(f"RL UL receive DoF <= 0 (n_r - u = {dof_ul})")
        dof_bhr = p.n_r - p.m_bh_r
        if dof_bhr <= 0:
            v.append(f"RL backhaul receive DoF <= 0 (n_r - m_bh_r = {dof_bhr})")

    return v


def require_valid(params: SystemParams, scheme: Scheme):
    violations = validate(params, scheme)
    if violations:
        raise StructuralError(violations)


def parse_config_text(text: str, *, known_keys=None) -> dict:
    """Parse flat ``name = value`` lines into a dict.

    Blank lines and ``#`` comments are ignored.  Values that look like
    integers are returned as int, everything else as float (or as a bare
    string when not numeric, which sweep specs use for enum-like fields).
    """
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'name = value', got {line!r}")
        name, _, value = stripped.partition("=")
        name = name.strip().lower()
        value = value.strip()
        if known_keys is not None and name not in known_keys:
            raise ConfigError(f"line {lineno}: unknown key {name!r}")
        if name in out:
            raise ConfigError(f"line {lineno}: duplicate key {name!r}")
        out[name] = _parse_scalar(value)
    return out


def _parse_scalar(value: str):
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def load_params_db(path) -> dict:
    """Read a parameter config file into its raw dB-scale map."""
    text = Path(path).read_text(encoding="utf-8")
    raw = parse_config_text(text, known_keys=set(CONFIG_KEYS))
    return raw


def load_params(path) -> SystemParams:
    return params_from_db(load_params_db(path))
