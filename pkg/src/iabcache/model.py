"""Scalar model primitives: blockage, path loss, Zipf popularity, cache hits, power budget."""

from __future__ import annotations

import math

import numpy as np

from .config import LOS, NLOS, LinkState


def _positive_distance(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise ValueError("distance must be strictly positive")
    return r


def los_probability(r, beta, los_radius=18.0):
    """min(18/r, 1) (1 - exp(-beta r)) + exp(-beta r); exactly 1 inside ``los_radius``."""
    r = _positive_distance(r)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return _los_prob(r, beta, los_radius)


def _los_prob(r, beta, los_radius=18.0):
    # unchecked array version used by the integrators
    e = np.exp(-beta * r)
    with np.errstate(divide="ignore"):
        near = np.minimum(los_radius / r, 1.0)
    return near * (1.0 - e) + e


def nlos_probability(r, beta, los_radius=18.0):
    return 1.0 - los_probability(r, beta, los_radius)


def state_probability(r, state, beta, los_radius=18.0):
    p = _los_prob(np.asarray(r, dtype=float), beta, los_radius)
    return p if state is LOS else 1.0 - p


def path_loss(r, state, cfg):
    """Path gain ``A (r/ref)^-alpha`` for the given link state (dimensionless)."""
    r = _positive_distance(r)
    A, alpha = path_params(state, cfg)
    return A * (r / cfg.ref_distance) ** -alpha


def path_params(state, cfg):
    if state is LOS:
        return cfg.A_L, cfg.alpha_L
    if state is NLOS:
        return cfg.A_NL, cfg.alpha_NL
    raise TypeError(f"not a LinkState: {state!r}")


def _zipf_weights(F, gamma_p):
    return np.arange(1, F + 1, dtype=float) ** -float(gamma_p)


def zipf_pmf(f, F, gamma_p):
    """Request probability of the f-th most popular of F files."""
    if not (1 <= f <= F) or int(f) != f:
        raise ValueError(f"file index {f} outside 1..{F}")
    w = _zipf_weights(int(F), gamma_p)
    # sum smallest-first for accuracy at large F
    return float(w[int(f) - 1] / math.fsum(w[::-1]))


def cache_hit_ratio(C, F, gamma_p):
    """Hit ratio of a cache holding the C most popular files."""
    if int(C) != C or C < 0:
        raise ValueError("cache capacity must be a non-negative integer")
    if C > F:
        raise ValueError(f"cache capacity {C} exceeds library size {F}")
    C = int(C)
    if C == 0:
        return 0.0
    if C == F:
        return 1.0
    w = _zipf_weights(int(F), gamma_p)
    return math.fsum(w[:C]) / math.fsum(w)


def sbs_transmit_power(cfg, C=None):
    """(P_s_tot - P_s_fc - w_ca C bits) / rho_s, clamped at zero."""
    C = cfg.C if C is None else C
    p = (cfg.P_s_tot - cfg.P_s_fc - cfg.w_ca * C * cfg.file_bits) / cfg.rho_s
    return max(p, 0.0)


def mbs_transmit_power(cfg):
    """MBS transmit power; the MBS caches the whole library of F files."""
    p = (cfg.P_m_tot - cfg.P_m_fc - cfg.w_ca * cfg.F * cfg.file_bits) / cfg.rho_m
    return max(p, 0.0)


def max_cache_capacity(cfg):
    """Largest C (at most F) that leaves the SBS a strictly positive transmit power."""
    headroom = cfg.P_s_tot - cfg.P_s_fc
    if headroom <= 0:
        return 0
    per_file = cfg.w_ca * cfg.file_bits
    if per_file <= 0:
        return cfg.F
    c = math.floor(headroom / per_file)
    if c * per_file >= headroom:
        c -= 1
    return int(min(max(c, 0), cfg.F))


def link_power(tier, cfg, C=None):
    """Biased transmit power P^tr * B of a tier (backhaul transmitters are MBSs)."""
    from .config import SBS

    if tier is SBS:
        return sbs_transmit_power(cfg, C) * cfg.B_s
    return mbs_transmit_power(cfg) * cfg.B_m


__all__ = [
    "LinkState", "los_probability", "nlos_probability", "state_probability", "path_loss",
    "path_params", "zipf_pmf", "cache_hit_ratio", "sbs_transmit_power",
    "mbs_transmit_power", "max_cache_capacity", "link_power",
]
