"""SINR coverage: conditional on serving distance, and integrated over association."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import BACKHAUL, LOS, MBS, NLOS, SBS, Tier, TierLink
from .geometry import _association_density, serving_radius, tier_density
from .interference import (DEFAULT_RULE, LaplaceQuery, laplace_exponent, laplace_interference,
                           received_power)
from .model import _positive_distance
from .quadrature import QuadSpec, composite_rule, integrate


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class CoverageResult:
    tier: Tier
    gamma: float
    los: float
    nlos: float

    @property
    def total(self):
        return self.los + self.nlos

    def component(self, state):
        return self.los if state is LOS else self.nlos


def _noise_factor(link, gamma, r, cfg, C=None):
    S = received_power(link, r, cfg, C)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(S > 0, -np.asarray(gamma) * cfg.N0 / np.where(S > 0, S, 1.0), -np.inf)
    x = np.where(np.asarray(gamma) == 0, 0.0, x)
    return np.exp(x)


def conditional_coverage(link, gamma, r, cfg, C=None, spec=QuadSpec(rel_tol=1e-9, abs_tol=1e-12)):
    """P[SINR > gamma | serving link at distance r], adaptive quadrature route."""
    if gamma < 0:
        raise ValueError("threshold must be non-negative")
    r = float(_positive_distance(r))
    if gamma == 0:
        return 1.0
    noise = float(_noise_factor(link, gamma, r, cfg, C))
    if noise == 0.0:
        return 0.0
    lt = laplace_interference(LaplaceQuery.at_threshold(link, gamma, r, cfg), cfg, C, spec)
    return noise * lt


def conditional_coverage_grid(link, gammas, r, cfg, C=None, rule=DEFAULT_RULE):
    """Vectorized conditional coverage on a (gamma, r) grid; shape (G, R)."""
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    expo = laplace_exponent(link, gammas, r, cfg, C, rule)
    S = received_power(link, r, cfg, C)
    with np.errstate(divide="ignore", invalid="ignore"):
        noise = np.where(S[None, :] > 0, gammas[:, None] * cfg.N0 / np.where(S > 0, S, 1.0)[None, :],
                         np.inf)
    noise[gammas == 0, :] = 0.0
    return np.exp(-(expo + noise))


@dataclass(frozen=True)
class RadialRule:
    """Panels for integrals over the serving distance."""

    near_fractions: tuple = (0.0, 0.03125, 0.125, 0.25, 0.5, 1.0)  # of los_radius
    far_panels: int = 24
    nodes: int = 12
    tail_mass: float = 1e-13

    def nodes_for(self, link, cfg):
        los = cfg.los_radius
        R = serving_radius(link, cfg, self.tail_mass)
        near = [f * los for f in self.near_fractions if f * los < R]
        top = max(R, los)
        breaks = sorted(set(near + list(np.linspace(los, top, self.far_panels + 1))))
        breaks = [b for b in breaks if b <= R] if R > los else sorted(set(near[:-1] + [R]))
        return composite_rule(np.array(breaks), self.nodes)


DEFAULT_RADIAL = RadialRule()
# radial nodes whose weighted density is below this cannot move a probability
DENSITY_FLOOR = 1e-18


def coverage_curve(link, gammas, cfg, C=None, rule=DEFAULT_RULE, radial=DEFAULT_RADIAL):
    """Marginal coverage P^cov_{k,sigma}(gamma) over an array of thresholds (fixed nodes)."""
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    if np.any(gammas < 0):
        raise ValueError("thresholds must be non-negative")
    if tier_density(link.tier, cfg) <= 0:
        return np.zeros(gammas.shape)
    r, w = radial.nodes_for(link, cfg)
    dens = _association_density(link, r, cfg, C) * w
    keep = dens > DENSITY_FLOOR
    if not np.any(keep):
        return np.zeros(gammas.shape)
    r, dens = r[keep], dens[keep]
    cond = conditional_coverage_grid(link, gammas, r, cfg, C, rule)
    return cond @ dens


def coverage(tier, gamma, cfg, C=None, method="fixed", spec=QuadSpec(rel_tol=1e-7, abs_tol=1e-12)):
    """Coverage of a tier at a linear SINR threshold, split by serving-link state.

    ``method="adaptive"`` nests adaptive quadrature (slow, with error control);
    ``"fixed"`` uses the vectorized panel rules.
    """
    if isinstance(tier, str):
        tier = Tier.parse(tier)
    if gamma < 0:
        raise ValueError("threshold must be non-negative")
    parts = []
    for state in (LOS, NLOS):
        link = TierLink(tier, state)
        if method == "fixed":
            parts.append(float(coverage_curve(link, [gamma], cfg, C)[0]))
        elif method == "adaptive":
            parts.append(_coverage_adaptive(link, gamma, cfg, C, spec))
        else:
            raise ValueError(f"unknown method {method!r}")
    return CoverageResult(tier, float(gamma), parts[0], parts[1])


def _coverage_adaptive(link, gamma, cfg, C, spec):
    if tier_density(link.tier, cfg) <= 0:
        return 0.0
    R = serving_radius(link, cfg, 1e-13)
    inner = spec.inner()

    def f(r):
        dens = float(_association_density(link, np.array(r), cfg, C))
        if dens == 0.0:
            return 0.0
        return conditional_coverage(link, gamma, r, cfg, C, inner) * dens

    return integrate(f, 0.0, R, spec, points=[cfg.los_radius]).value


def coverage_table(tiers, gammas_db, cfg, C=None):
    """Rows (tier, state, gamma_dB, probability) for every requested tier and threshold."""
    gammas_db = np.asarray(list(gammas_db), dtype=float)
    rows = []
    for tier in tiers:
        tier = Tier.parse(tier) if isinstance(tier, str) else tier
        curves = {}
        for state in (LOS, NLOS):
            curves[state] = coverage_curve(TierLink(tier, state), db_to_linear(gammas_db), cfg, C) \
                if gammas_db.size else np.zeros(0)
        for i, g in enumerate(gammas_db):
            for state in (LOS, NLOS):
                rows.append((tier, state, float(g), float(curves[state][i])))
            rows.append((tier, None, float(g), float(curves[LOS][i] + curves[NLOS][i])))
    return rows


ACCESS_TIERS = (SBS, MBS)
ALL_TIERS = (SBS, MBS, BACKHAUL)
