"""Network configuration record, link/tier enums and the flat config-file format."""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration value; ``key`` names the offending field."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class LinkState(enum.Enum):
    LOS = "L"
    NLOS = "NL"

    @property
    def short(self):
        return self.value


class Tier(enum.Enum):
    SBS = "s"
    MBS = "m"
    BACKHAUL = "bh"

    @classmethod
    def parse(cls, name):
        key = str(name).strip().lower()
        aliases = {"s": cls.SBS, "sbs": cls.SBS, "m": cls.MBS, "mbs": cls.MBS,
                   "bh": cls.BACKHAUL, "backhaul": cls.BACKHAUL}
        if key not in aliases:
            raise ValueError(f"unknown tier {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class TierLink:
    """A serving link: tier plus LoS/NLoS state. Backhaul links use the MBS tier."""

    tier: Tier
    state: LinkState

    @property
    def label(self):
        return f"{self.tier.value}_{self.state.value}"


LOS, NLOS = LinkState.LOS, LinkState.NLOS
SBS, MBS, BACKHAUL = Tier.SBS, Tier.MBS, Tier.BACKHAUL


def thermal_noise_w(bandwidth_hz, noise_figure_db=5.0):
    """kTB noise at 290 K (-174 dBm/Hz) plus a receiver noise figure, in watts."""
    dbm = -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return 10.0 ** (dbm / 10.0) * 1e-3


def dbm_to_w(dbm):
    return 10.0 ** (dbm / 10.0) * 1e-3


# key in config file -> field name
_FILE_KEYS = {
    "density.lambda_s": "lambda_s",
    "density.lambda_m": "lambda_m",
    "density.lambda_u": "lambda_u",
    "spectrum.W": "W",
    "pathloss.A_L": "A_L",
    "pathloss.alpha_L": "alpha_L",
    "pathloss.A_NL": "A_NL",
    "pathloss.alpha_NL": "alpha_NL",
    "pathloss.ref_distance": "ref_distance",
    "pathloss.los_radius": "los_radius",
    "blockage.beta": "beta",
    "association.B_s": "B_s",
    "association.B_m": "B_m",
    "power.P_s_tot": "P_s_tot",
    "power.P_m_tot": "P_m_tot",
    "power.P_s_fc": "P_s_fc",
    "power.P_m_fc": "P_m_fc",
    "power.rho_s": "rho_s",
    "power.rho_m": "rho_m",
    "cache.w_ca": "w_ca",
    "cache.F": "F",
    "cache.C": "C",
    "cache.file_bits": "file_bits",
    "cache.gamma_p": "gamma_p",
    "noise.N0": "N0",
}
# alternative spellings of the noise power
_NOISE_ALT_KEYS = ("noise.N0_dBm", "noise.noise_figure_dB")

ENV_PREFIX = "IABCACHE_"


@dataclass(frozen=True)
class NetworkConfig:
    """Every model parameter in SI units (m, m^-2, W, Hz, bits).

    Path gains are ``A * (r / ref_distance) ** -alpha``.  The default
    intercepts are quoted for distances in km, hence ``ref_distance=1000``.
    The default noise power is thermal noise over ``W`` with a 5 dB noise
    figure.
    """

    lambda_s: float = 1e-4
    lambda_m: float = 1e-5
    lambda_u: float = 3e-4
    W: float = 400e6
    A_L: float = 10 ** -10.38
    alpha_L: float = 2.09
    A_NL: float = 10 ** -14.54
    alpha_NL: float = 3.75
    ref_distance: float = 1000.0
    los_radius: float = 18.0
    beta: float = 0.027
    B_s: float = 10.0
    B_m: float = 1.0
    P_s_tot: float = 9.1
    P_m_tot: float = 610.0
    P_s_fc: float = 0.1
    P_m_fc: float = 10.16
    rho_s: float = 4.0
    rho_m: float = 15.13
    w_ca: float = 2.5e-9
    F: int = 1000
    C: int = 100
    file_bits: float = 3.2e7
    gamma_p: float = 0.6
    N0: float = field(default_factory=lambda: thermal_noise_w(400e6, 5.0))

    def __post_init__(self):
        for name in ("lambda_s", "lambda_m", "lambda_u"):
            _check(name, getattr(self, name) >= 0, "density must be non-negative")
        for name in ("W", "A_L", "A_NL", "alpha_L", "alpha_NL", "ref_distance",
                     "P_s_tot", "P_m_tot", "rho_s", "rho_m", "file_bits"):
            _check(name, getattr(self, name) > 0, "must be strictly positive")
        for name in ("P_s_fc", "P_m_fc", "w_ca", "beta", "gamma_p", "N0", "los_radius",
                     "B_s", "B_m"):
            _check(name, getattr(self, name) >= 0, "must be non-negative")
        _check("B_s", self.B_s > 0, "must be strictly positive")
        _check("B_m", self.B_m > 0, "must be strictly positive")
        _check("alpha_L", self.alpha_L <= self.alpha_NL, "alpha_L must not exceed alpha_NL")
        _check("A_L", self.A_L >= self.A_NL, "A_L must not be below A_NL")
        _check("alpha_L", self.alpha_L > 2, "exponents must exceed 2 for finite interference")
        _check("F", int(self.F) == self.F and self.F >= 1, "library size must be a positive integer")
        _check("C", int(self.C) == self.C and 0 <= self.C <= self.F, "need integer 0 <= C <= F")
        _check("P_s_fc", self.P_s_fc <= self.P_s_tot, "fixed power exceeds total SBS power")
        _check("P_m_fc", self.P_m_fc <= self.P_m_tot, "fixed power exceeds total MBS power")
        headroom = self.P_s_tot - self.P_s_fc - self.w_ca * self.C * self.file_bits
        _check("C", headroom >= 0, "cache power exceeds the SBS power budget")
        object.__setattr__(self, "F", int(self.F))
        object.__setattr__(self, "C", int(self.C))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        return dataclasses.asdict(self)

    def fingerprint(self):
        """Short stable hash of every field value."""
        blob = json.dumps({k: repr(v) for k, v in sorted(self.as_dict().items())})
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def noise_dbm(self):
        return 10.0 * math.log10(self.N0 / 1e-3) if self.N0 > 0 else -math.inf

    # ---- file / env round trip -------------------------------------------

    @classmethod
    def from_mapping(cls, values):
        """Build from ``{"power.P_s_tot": "9.1", ...}``; unknown keys raise."""
        kwargs = {}
        noise_dbm = noise_fig = None
        for key, raw in values.items():
            if key == "noise.N0_dBm":
                noise_dbm = _to_float(key, raw)
                continue
            if key == "noise.noise_figure_dB":
                noise_fig = _to_float(key, raw)
                continue
            if key not in _FILE_KEYS:
                raise ConfigError(key, "unknown configuration key")
            name = _FILE_KEYS[key]
            kwargs[name] = _to_int(key, raw) if name in ("F", "C") else _to_float(key, raw)
        if "N0" not in kwargs:
            if noise_dbm is not None:
                kwargs["N0"] = dbm_to_w(noise_dbm)
            elif noise_fig is not None:
                kwargs["N0"] = thermal_noise_w(kwargs.get("W", cls.W), noise_fig)
            elif "W" in kwargs:
                kwargs["N0"] = thermal_noise_w(kwargs["W"], 5.0)
        try:
            return cls(**kwargs)
        except ConfigError as err:
            inverse = {v: k for k, v in _FILE_KEYS.items()}
            raise ConfigError(inverse.get(err.key, err.key), str(err).split(": ", 1)[-1]) from None

    @classmethod
    def from_file(cls, path, env=None):
        values = parse_config_text(Path(path).read_text())
        values.update(env_overrides(os.environ if env is None else env))
        return cls.from_mapping(values)

    def to_text(self):
        lines = ["# iabcache network configuration (SI units)"]
        for key, name in _FILE_KEYS.items():
            lines.append(f"{key} = {getattr(self, name)!r}")
        return "\n".join(lines) + "\n"


def _check(key, ok, message):
    if not ok:
        raise ConfigError(key, message)


def _to_float(key, raw):
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"not a number: {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    return value


def _to_int(key, raw):
    value = _to_float(key, raw)
    if value != int(value):
        raise ConfigError(key, f"not an integer: {raw!r}")
    return int(value)


def parse_config_text(text):
    """Parse ``section.key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FILE_KEYS and key not in _NOISE_ALT_KEYS:
            raise ConfigError(key, "unknown configuration key")
        values[key] = raw
    return values


def env_overrides(environ):
    """Config keys from ``IABCACHE_<SECTION>__<KEY>`` variables (case-insensitive)."""
    lookup = {k.upper().replace(".", "__"): k for k in list(_FILE_KEYS) + list(_NOISE_ALT_KEYS)}
    out = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        suffix = name[len(ENV_PREFIX):].upper()
        if suffix not in lookup:
            raise ConfigError(name, "environment override names no configuration key")
        out[lookup[suffix]] = raw
    return out


CONFIG_KEYS = tuple(_FILE_KEYS) + _NOISE_ALT_KEYS
