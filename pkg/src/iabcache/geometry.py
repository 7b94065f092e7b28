"""Serving-distance densities and biased-association probabilities.

The association rule compares biased received powers ``P B A (r/ref)^-alpha``
with small-scale fading evaluated at its mean.  A user served by link
(k, sigma) at distance r sees no transmitter of class (j, tau) closer than
the distance at which that class would deliver the same biased power:

    d = ref * (P_k A_sigma / (P_j A_tau))^(-1/alpha_tau) * (r/ref)^(alpha_sigma/alpha_tau)

Each exclusion probability is the void probability exp(-lambda_j pi d^2).
"""

from __future__ import annotations

import math

import numpy as np

from .config import BACKHAUL, LOS, MBS, NLOS, SBS, TierLink
from .model import _positive_distance, link_power, path_params, state_probability
from .quadrature import QuadSpec, integrate, truncation_radius

ACCESS_INTERFERERS = (TierLink(SBS, LOS), TierLink(SBS, NLOS),
                      TierLink(MBS, LOS), TierLink(MBS, NLOS))
BACKHAUL_INTERFERERS = (TierLink(MBS, LOS), TierLink(MBS, NLOS))

# kind -> (serving link, interfering class); density is the interferer tier's
EXCLUSION_KINDS = {
    "ln_ss": (TierLink(SBS, LOS), TierLink(SBS, NLOS)),
    "ll_sm": (TierLink(SBS, LOS), TierLink(MBS, LOS)),
    "ln_sm": (TierLink(SBS, LOS), TierLink(MBS, NLOS)),
    "nl_ss": (TierLink(SBS, NLOS), TierLink(SBS, LOS)),
    "nl_sm": (TierLink(SBS, NLOS), TierLink(MBS, LOS)),
    "nn_sm": (TierLink(SBS, NLOS), TierLink(MBS, NLOS)),
    "ln_mm": (TierLink(MBS, LOS), TierLink(MBS, NLOS)),
    "ll_ms": (TierLink(MBS, LOS), TierLink(SBS, LOS)),
    "ln_ms": (TierLink(MBS, LOS), TierLink(SBS, NLOS)),
    "nl_mm": (TierLink(MBS, NLOS), TierLink(MBS, LOS)),
    "nl_ms": (TierLink(MBS, NLOS), TierLink(SBS, LOS)),
    "nn_ms": (TierLink(MBS, NLOS), TierLink(SBS, NLOS)),
    "ln_bh": (TierLink(BACKHAUL, LOS), TierLink(MBS, NLOS)),
    "nl_bh": (TierLink(BACKHAUL, NLOS), TierLink(MBS, LOS)),
}

ALL_LINKS = tuple(TierLink(t, s) for t in (SBS, MBS, BACKHAUL) for s in (LOS, NLOS))


def tier_density(tier, cfg):
    return cfg.lambda_s if tier is SBS else cfg.lambda_m


def interferers(link):
    """Transmitter classes that interfere with (and compete for) a serving link."""
    return BACKHAUL_INTERFERERS if link.tier is BACKHAUL else ACCESS_INTERFERERS


def exclusion_kinds_for(link):
    """Exclusion kinds whose product forms the association density of ``link``."""
    return [k for k, (srv, _) in EXCLUSION_KINDS.items() if srv == link]


def nearest_distance_pdf(link, r, cfg):
    """Density of the nearest tier-k transmitter at distance r with the link in ``state``."""
    r = _positive_distance(r)
    return _nearest_pdf(link, r, cfg)


def _nearest_pdf(link, r, cfg):
    lam = tier_density(link.tier, cfg)
    p = state_probability(r, link.state, cfg.beta, cfg.los_radius)
    return p * np.exp(-math.pi * lam * r * r) * 2.0 * math.pi * lam * r


def exclusion_distance(serving, other, r, cfg, C=None):
    """Distance inside which a class-``other`` transmitter would out-power the serving link."""
    r = np.asarray(r, dtype=float)
    A_k, a_k = path_params(serving.state, cfg)
    A_j, a_j = path_params(other.state, cfg)
    p_k = link_power(serving.tier, cfg, C)
    p_j = link_power(other.tier, cfg, C)
    with np.errstate(divide="ignore", over="ignore"):
        ratio = (p_k * A_k) / (p_j * A_j) if p_j > 0 else math.inf
        if ratio == 0:
            return np.full(r.shape, math.inf)
        if math.isinf(ratio):
            return np.zeros(r.shape)
        ref = cfg.ref_distance
        return ref * ratio ** (-1.0 / a_j) * (r / ref) ** (a_k / a_j)


def exclusion_probability(kind, r, cfg, C=None):
    """Void probability exp(-lambda pi d(r)^2) of one of the 14 tabulated kinds."""
    if kind not in EXCLUSION_KINDS:
        raise KeyError(f"unknown exclusion kind {kind!r}; expected one of {sorted(EXCLUSION_KINDS)}")
    r = _positive_distance(r)
    serving, other = EXCLUSION_KINDS[kind]
    return _void(serving, other, r, cfg, C)


def _void(serving, other, r, cfg, C=None):
    lam = tier_density(other.tier, cfg)
    if lam <= 0:
        return np.ones(np.shape(r))
    d = exclusion_distance(serving, other, r, cfg, C)
    return np.exp(-lam * math.pi * d * d)


def association_density(link, r, cfg, C=None):
    """Density in r of being served over ``link`` at distance r (product form)."""
    r = _positive_distance(r)
    return _association_density(link, r, cfg, C)


def _association_density(link, r, cfg, C=None):
    if link.tier is SBS and link_power(SBS, cfg, C) <= 0:
        return np.zeros(np.shape(r))
    out = _nearest_pdf(link, r, cfg)
    for kind in exclusion_kinds_for(link):
        _, other = EXCLUSION_KINDS[kind]
        out = out * _void(link, other, r, cfg, C)
    return out


def serving_radius(link, cfg, tail_mass=1e-12):
    """Truncation radius for integrals weighted by the serving-distance density."""
    lam = tier_density(link.tier, cfg)
    return truncation_radius(lam, tail_mass)


def association_mass(link, cfg, C=None, spec=QuadSpec(rel_tol=1e-10, abs_tol=1e-14)):
    """Integrated association density of one link; not renormalized."""
    if tier_density(link.tier, cfg) <= 0:
        return 0.0
    R = serving_radius(link, cfg, spec.tail_mass * 1e-2)
    f = lambda r: float(_association_density(link, np.array(r), cfg, C))
    return integrate(f, 0.0, R, spec, points=[cfg.los_radius]).value if R > 0 else 0.0
