"""Laplace transforms of the aggregate interference seen on a serving link.

For a link (k, sigma) at distance r with received power S(r), and Rayleigh
fading, every transmitter class (j, tau) outside its exclusion distance
contributes

    2 pi lambda_j  int_{d_jtau(r)}^inf  P_tau(u) u / (1 + S(r) / (gamma I_jtau(u))) du

to the exponent, with I_jtau(u) = P_j B_j A_tau (u/ref)^-alpha_tau.  The same
template covers the six serving links; only the interferer set, the lower
limits and the path-loss pair change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import LOS, MBS, NLOS, SBS, TierLink
from .geometry import exclusion_distance, interferers, tier_density
from .model import _los_prob, _positive_distance, link_power, path_params
from .quadrature import QuadSpec, composite_rule, integrate, power_tail


@dataclass(frozen=True)
class LaplaceQuery:
    """Transform evaluated at ``s_argument = gamma (r/ref)^alpha_sigma`` for a serving link."""

    serving: TierLink
    s_argument: float
    r: float

    def __post_init__(self):
        if not self.s_argument >= 0:
            raise ValueError("s_argument must be non-negative")
        if not self.r > 0:
            raise ValueError("serving distance must be positive")

    @classmethod
    def at_threshold(cls, serving, gamma, r, cfg):
        _, alpha = path_params(serving.state, cfg)
        return cls(serving, gamma * (r / cfg.ref_distance) ** alpha, r)

    def threshold(self, cfg):
        _, alpha = path_params(self.serving.state, cfg)
        return self.s_argument * (self.r / cfg.ref_distance) ** -alpha


def received_power(link, r, cfg, C=None):
    """Biased mean received power P B A (r/ref)^-alpha on a serving link."""
    A, alpha = path_params(link.state, cfg)
    return link_power(link.tier, cfg, C) * A * (np.asarray(r, dtype=float) / cfg.ref_distance) ** -alpha


def _active_interferers(link, cfg, C):
    out = []
    for other in interferers(link):
        lam = tier_density(other.tier, cfg)
        p = link_power(other.tier, cfg, C)
        if lam > 0 and p > 0:
            A, alpha = path_params(other.state, cfg)
            out.append((other, lam, p * A, alpha))
    return out


# ---------------------------------------------------------------------------
# adaptive scalar route


def laplace_interference(query, cfg, C=None, spec=QuadSpec(rel_tol=1e-9, abs_tol=1e-12)):
    """E[exp(-s I)] for one serving link, by adaptive quadrature."""
    link, r = query.serving, float(query.r)
    gamma = query.threshold(cfg)
    if gamma == 0:
        return 1.0
    S = float(received_power(link, r, cfg, C))
    if S <= 0:
        return 0.0 if _active_interferers(link, cfg, C) else 1.0
    total = 0.0
    for other, lam, pa, alpha in _active_interferers(link, cfg, C):
        d = float(exclusion_distance(link, other, r, cfg, C))
        if math.isinf(d):
            continue
        K = S / (gamma * pa)
        ref = cfg.ref_distance

        def f(u, other=other, alpha=alpha, K=K):
            p = _los_prob(u, cfg.beta, cfg.los_radius)
            if other.state is NLOS:
                p = 1.0 - p
            return p * u / (1.0 + K * (u / ref) ** alpha)

        H = _blockage_horizon(cfg)
        if H is None:
            val = integrate(f, d, math.inf, spec, points=[cfg.los_radius]).value
        else:
            # finite part numerically, power-law tail past the horizon in closed form
            lo = max(d, H)
            val = integrate(f, d, lo, spec, points=[cfg.los_radius]).value if d < H else 0.0
            los_tail = cfg.los_radius * ref * float(power_tail(lo / ref, K, alpha, 0))
            if other.state is NLOS:
                val += ref * ref * float(power_tail(lo / ref, K, alpha, 1)) - los_tail
            else:
                val += los_tail
        total += 2.0 * math.pi * lam * val
    return math.exp(-total)


# ---------------------------------------------------------------------------
# vectorized fixed-node route


@dataclass(frozen=True)
class NodeRule:
    """Panel layout for the fixed-node interference integrals."""

    near_panels: int = 4     # log-spaced panels on [d, los_radius]
    far_panels: int = 10     # log-spaced panels on [los_radius, blockage horizon]
    nodes: int = 8

    def near(self):
        return composite_rule(np.linspace(0.0, 1.0, self.near_panels + 1), self.nodes)

    def far(self):
        return composite_rule(np.linspace(0.0, 1.0, self.far_panels + 1), self.nodes)


DEFAULT_RULE = NodeRule()


def _blockage_horizon(cfg):
    # beyond this distance exp(-beta u) < e^-50 and P_L(u) = los_radius/u
    return max(50.0 / cfg.beta, 10.0 * cfg.los_radius) if cfg.beta > 0 else None


def _class_exponent(other, lam, pa, alpha, d, S, gammas, cfg, rule):
    """2 pi lam J(gamma, r) for one interferer class; d, S shaped (R,), gammas (G,)."""
    ref, los = cfg.ref_distance, cfg.los_radius
    G, R = gammas.size, d.size
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        K = S[None, :] / (gammas[:, None] * pa)  # (G, R); inf where gamma == 0
    total = np.zeros((G, R))
    horizon = _blockage_horizon(cfg)
    finite = np.isfinite(d)

    def add_segment(lo, hi, rule_nodes):
        # log-mapped panels between per-r endpoints lo < hi
        x, w = rule_nodes
        span = np.log(hi / lo)
        u = lo[:, None] * np.exp(span[:, None] * x[None, :])  # (R, n)
        weight = w[None, :] * span[:, None] * u
        p = _los_prob(u, cfg.beta, los)
        if other.state is NLOS:
            p = 1.0 - p
        wp = weight * p * u
        v = (u / ref) ** alpha
        with np.errstate(over="ignore", invalid="ignore"):
            q = 1.0 / (1.0 + K[:, :, None] * v[None, :, :])
        q = np.where(np.isnan(q), 0.0, q)
        return np.einsum("grn,rn->gr", q, wp)

    d_eff = np.where(finite, d, np.inf)
    # near field: P_L = 1, so only the LoS class contributes below los_radius
    if other.state is LOS:
        lo = np.minimum(d_eff, los)
        near = finite & (lo < los)
        if np.any(near):
            lo_n = np.where(near, lo, los)
            total += add_segment(lo_n, np.full(R, los), rule.near()) * near[None, :]
    a2 = np.maximum(d_eff, los)
    if horizon is not None:
        b2 = np.maximum(a2, horizon)
        mid = finite & (b2 > a2)
        if np.any(mid):
            total += add_segment(np.where(mid, a2, 1.0), np.where(mid, b2, 1.0), rule.far()) * mid[None, :]
        tail_lo = np.where(finite, b2, np.inf) / ref
        if other.state is LOS:
            t = los * ref * power_tail(tail_lo[None, :], K, alpha, 0)
        else:
            t1 = ref * ref * power_tail(tail_lo[None, :], K, alpha, 1)
            t0 = los * ref * power_tail(tail_lo[None, :], K, alpha, 0)
            # t1 dominates as K -> 0; keep an overflowed tail infinite
            with np.errstate(invalid="ignore"):
                t = np.where(np.isinf(t1), np.inf, t1 - t0)
    else:
        # no blockage: P_L = 1 beyond the near field, the NLoS class is empty
        tail_lo = np.where(finite, a2, np.inf) / ref
        if other.state is LOS:
            t = ref * ref * power_tail(tail_lo[None, :], K, alpha, 1)
        else:
            t = np.zeros((G, R))
    t = np.where(np.isfinite(tail_lo)[None, :], t, 0.0)
    total += t
    return 2.0 * math.pi * lam * total


def laplace_exponent(link, gammas, r, cfg, C=None, rule=DEFAULT_RULE, gamma_chunk=48):
    """-log E[exp(-gamma I / S(r))] on a (gamma, r) grid; shape (G, R)."""
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    S = received_power(link, r, cfg, C)
    out = np.zeros((gammas.size, r.size))
    active = _active_interferers(link, cfg, C)
    if not active:
        return out
    if link_power(link.tier, cfg, C) <= 0:
        out[gammas > 0, :] = np.inf
        return out
    for other, lam, pa, alpha in active:
        d = exclusion_distance(link, other, r, cfg, C)
        for start in range(0, gammas.size, gamma_chunk):
            g = gammas[start:start + gamma_chunk]
            out[start:start + gamma_chunk] += _class_exponent(other, lam, pa, alpha, d, S, g, cfg, rule)
    out[gammas == 0, :] = 0.0
    return out


def laplace_transform(link, gammas, r, cfg, C=None, rule=DEFAULT_RULE):
    """Vectorized E[exp(-gamma I / S(r))]; shape (G, R)."""
    return np.exp(-laplace_exponent(link, gammas, r, cfg, C, rule))


# ---------------------------------------------------------------------------
# interference-limited approximation


def laplace_interference_limited(s_argument, r, cfg, C=None):
    """LoS-only transform for an LoS SBS link: no blockage thinning, LoS exponents for both tiers.

    ``s_argument = gamma (r/ref)^alpha_L``.  Vectorized over ``s_argument``
    and ``r`` (broadcast).
    """
    r = _positive_distance(r)
    s_argument = np.asarray(s_argument, dtype=float)
    if np.any(s_argument < 0):
        raise ValueError("s_argument must be non-negative")
    ref, alpha = cfg.ref_distance, cfg.alpha_L
    s_argument, r = np.broadcast_arrays(s_argument, r)
    gamma = s_argument * (r / ref) ** -alpha
    return np.exp(-_interference_limited_exponent(gamma, r, cfg, C))


def _interference_limited_exponent(gamma, r, cfg, C=None):
    gamma = np.asarray(gamma, dtype=float)
    r = np.asarray(r, dtype=float)
    ref, alpha = cfg.ref_distance, cfg.alpha_L
    p_s = link_power(SBS, cfg, C)
    p_m = link_power(MBS, cfg, C)
    with np.errstate(divide="ignore"):
        K_s = np.where(gamma > 0, (ref / r) ** alpha / np.where(gamma > 0, gamma, 1.0), np.inf)
    total = 2.0 * math.pi * cfg.lambda_s * ref * ref * power_tail(r / ref, K_s, alpha, 1)
    if cfg.lambda_m > 0 and p_m > 0 and p_s > 0:
        d_m = (p_m / p_s) ** (1.0 / alpha) * r
        with np.errstate(divide="ignore"):
            K_m = np.where(gamma > 0, p_s * (r / ref) ** -alpha / (np.where(gamma > 0, gamma, 1.0) * p_m), np.inf)
        total = total + 2.0 * math.pi * cfg.lambda_m * ref * ref * power_tail(d_m / ref, K_m, alpha, 1)
    return np.where(gamma > 0, total, 0.0)


__all__ = [
    "LaplaceQuery", "NodeRule", "DEFAULT_RULE", "received_power", "laplace_interference",
    "laplace_exponent", "laplace_transform", "laplace_interference_limited",
]
