"""Finite-window PPP drop simulator used as an independent check on the analysis.

Each drop places SBSs and MBSs as Poisson processes in a disk around a
typical user at the origin (plus the LoS-only far field out to a much larger
radius, since LoS interference decays slowly), draws an independent LoS state and Rayleigh
fading gain per link, associates the user with the strongest biased
received power over every BS, and evaluates the access SINR.  The typical
SBS (also at the origin, fresh LoS and fading draws) associates with the
strongest MBS of the same realization for the backhaul SINR.

Per-drop random streams come from ``SeedSequence(seed, spawn_key=(i,))``,
so results do not depend on drop order or on how drops are split between
workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import BACKHAUL, LOS, MBS, NLOS, SBS, TierLink
from .geometry import exclusion_distance, interferers, tier_density
from .interference import received_power
from .model import _los_prob, cache_hit_ratio, link_power, path_params

Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimSpec:
    drops: int = 10_000
    seed: int = 1
    window: float | None = None      # disk radius in m; None picks one from the densities
    far_window: float = 100_000.0    # LoS-only far field out to this radius
    association: str = "instantaneous"  # or "mean": ignore fading when associating
    rate_rule: str = "average"       # "average": backhaul share scaled by 1/(1-p_h); "bernoulli": per-request hit
    jobs: int = 1

    def __post_init__(self):
        if int(self.drops) != self.drops or self.drops < 1:
            raise ValueError("drops must be a positive integer")
        if self.window is not None and not self.window > 0:
            raise ValueError("window radius must be positive")
        if not self.far_window >= 0:
            raise ValueError("far window must be non-negative")
        if self.association not in ("instantaneous", "mean"):
            raise ValueError("association must be 'instantaneous' or 'mean'")
        if self.rate_rule not in ("average", "bernoulli"):
            raise ValueError("rate_rule must be 'average' or 'bernoulli'")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    def radius(self, cfg):
        if self.window is not None:
            return float(self.window)
        lam = min((x for x in (cfg.lambda_s, cfg.lambda_m) if x > 0), default=0.0)
        if lam == 0:
            return 2000.0
        return max(2000.0, 5.0 / math.sqrt(math.pi * lam))


def drop_rng(seed, index):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(int(index),))))


# ---------------------------------------------------------------------------
# one network drop


def _far_los(rng, lam, lo, hi, cfg):
    """Distances of LoS transmitters in the annulus [lo, hi].

    Their intensity 2 pi lam u P_L(u) is bounded by 2 pi lam (los_radius +
    hi e^{-beta lo}), nearly constant once the exponential term has died out,
    so a uniform proposal thinned to the exact intensity is cheap and exact.
    """
    if lam <= 0 or hi <= lo:
        return np.zeros(0)
    bound = 2.0 * math.pi * lam * (cfg.los_radius + hi * math.exp(-cfg.beta * lo))
    u = rng.uniform(lo, hi, rng.poisson(bound * (hi - lo)))
    keep = rng.random(u.size) * bound < 2.0 * math.pi * lam * u * _los_prob(u, cfg.beta, cfg.los_radius)
    return u[keep]


def _place(rng, lam, R, far, cfg, inner=0.0):
    """Transmitter distances and LoS flags: full process on [inner, R], LoS-only on [R, far]."""
    if lam > 0 and R > inner:
        n = rng.poisson(lam * math.pi * (R * R - inner * inner))
        r = np.sqrt(inner * inner + (R * R - inner * inner) * rng.random(n))
    else:
        r = np.zeros(0)
    los = rng.random(r.size) < _los_prob(r, cfg.beta, cfg.los_radius)
    u = _far_los(rng, lam, max(R, inner), far, cfg)
    return np.concatenate([r, u]), np.concatenate([los, np.ones(u.size, dtype=bool)])


def _gains(rng, r, los, cfg):
    A = np.where(los, cfg.A_L, cfg.A_NL)
    alpha = np.where(los, cfg.alpha_L, cfg.alpha_NL)
    return A * (r / cfg.ref_distance) ** -alpha, rng.exponential(1.0, r.size)


def simulate_drop(index, cfg, spec, C=None):
    C = cfg.C if C is None else C
    rng = drop_rng(spec.seed, index)
    R = spec.radius(cfg)
    far = max(spec.far_window, R)
    r_s, los_s = _place(rng, cfg.lambda_s, R, far, cfg)
    r_m, los_m = _place(rng, cfg.lambda_m, R, far, cfg)
    p_s, p_m = link_power(SBS, cfg, C), link_power(MBS, cfg, C)

    g_s, h_s = _gains(rng, r_s, los_s, cfg)
    g_m, h_m = _gains(rng, r_m, los_m, cfg)
    rx = np.concatenate([p_s * g_s * h_s, p_m * g_m * h_m])
    los = np.concatenate([los_s, los_m])
    if spec.association == "instantaneous":
        score = rx
    else:
        score = np.concatenate([p_s * g_s, p_m * g_m])
    if score.size == 0 or not np.any(score > 0):
        tier, state, sinr = -1, 0, 0.0
    else:
        k = int(np.argmax(score))
        tier = 0 if k < r_s.size else 1
        state = 0 if los[k] else 1
        sinr = rx[k] / (rx.sum() - rx[k] + cfg.N0)

    # backhaul: typical SBS at the origin against the same MBS positions in
    # the window with fresh LoS draws; the LoS far field is sampled afresh
    near_m = r_m[r_m <= R]
    far_m = _far_los(rng, cfg.lambda_m, R, far, cfg)
    r_bh = np.concatenate([near_m, far_m])
    bh_los = np.concatenate([rng.random(near_m.size) < _los_prob(near_m, cfg.beta, cfg.los_radius),
                             np.ones(far_m.size, dtype=bool)])
    bh_g, bh_h = _gains(rng, r_bh, bh_los, cfg)
    bh_rx = p_m * bh_g * bh_h
    bh_score = bh_rx if spec.association == "instantaneous" else p_m * bh_g
    if bh_rx.size == 0 or p_m <= 0:
        bh_state, bh_sinr = -1, 0.0
    else:
        j = int(np.argmax(bh_score))
        bh_state = 0 if bh_los[j] else 1
        bh_sinr = bh_rx[j] / (bh_rx.sum() - bh_rx[j] + cfg.N0)
    hit = bool(rng.random() < cache_hit_ratio(C, cfg.F, cfg.gamma_p))
    return tier, state, float(sinr), bh_state, float(bh_sinr), hit


def _chunk(args):
    start, stop, cfg, spec, C = args
    return [simulate_drop(i, cfg, spec, C) for i in range(start, stop)]


def run_drops(cfg, spec=SimSpec(), C=None):
    """Simulate ``spec.drops`` drops; returns a ``DropTable`` ordered by drop index."""
    C = cfg.C if C is None else C
    n = int(spec.drops)
    if spec.jobs == 1:
        rows = _chunk((0, n, cfg, spec, C))
    else:
        size = max(1, math.ceil(n / (spec.jobs * 4)))
        tasks = [(a, min(a + size, n), cfg, spec, C) for a in range(0, n, size)]
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            rows = [row for part in pool.map(_chunk, tasks) for row in part]
    arr = np.array(rows, dtype=float).reshape(n, 6)
    return DropTable(cfg, spec, int(C), arr[:, 0].astype(int), arr[:, 1].astype(int), arr[:, 2],
                     arr[:, 3].astype(int), arr[:, 4], arr[:, 5].astype(bool))


# ---------------------------------------------------------------------------
# estimators


@dataclass(frozen=True)
class Estimate:
    mean: float
    half_width: float  # 95% confidence half-width

    @property
    def low(self):
        return self.mean - self.half_width

    @property
    def high(self):
        return self.mean + self.half_width


def _estimate(samples):
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        return Estimate(float(x.mean()) if x.size else math.nan, math.inf)
    return Estimate(float(x.mean()), float(Z95 * x.std(ddof=1) / math.sqrt(x.size)))


_TIER_CODE = {SBS: 0, MBS: 1}
_STATE_CODE = {LOS: 0, NLOS: 1}


@dataclass
class DropTable:
    cfg: object
    spec: SimSpec
    C: int
    tier: np.ndarray
    state: np.ndarray
    sinr: np.ndarray
    bh_state: np.ndarray
    bh_sinr: np.ndarray
    hit: np.ndarray

    @property
    def size(self):
        return self.tier.size

    def coverage(self, link, gamma):
        """Empirical P[served over ``link`` and SINR > gamma]."""
        if link.tier is BACKHAUL:
            ok = (self.bh_state == _STATE_CODE[link.state]) & (self.bh_sinr > gamma)
        else:
            ok = (self.tier == _TIER_CODE[link.tier]) & (self.state == _STATE_CODE[link.state]) & (self.sinr > gamma)
        return _estimate(ok)

    def tier_coverage(self, tier, gamma):
        if tier is BACKHAUL:
            return _estimate(self.bh_sinr > gamma)
        return _estimate((self.tier == _TIER_CODE[tier]) & (self.sinr > gamma))

    def association(self, link):
        if link.tier is BACKHAUL:
            return _estimate(self.bh_state == _STATE_CODE[link.state])
        return _estimate((self.tier == _TIER_CODE[link.tier]) & (self.state == _STATE_CODE[link.state]))

    def spectral_efficiency(self, eta):
        """Per-drop spectral efficiency of the typical user at access share ``eta``."""
        cfg = self.cfg
        ph = cache_hit_ratio(self.C, cfg.F, cfg.gamma_p)
        access = eta * np.log2(1.0 + self.sinr)
        bh = (1.0 - eta) * np.log2(1.0 + self.bh_sinr)
        if self.spec.rate_rule == "average":
            backhaul = np.full(self.size, np.inf) if ph >= 1.0 else bh / (1.0 - ph)
        else:
            backhaul = np.where(self.hit, np.inf, bh)
        sbs = np.minimum(access, backhaul)
        out = np.where(self.tier == 0, sbs, np.where(self.tier == 1, access, 0.0))
        return out

    def ase(self, eta):
        """lambda_u E[R] with its 95% interval, in bit/s/Hz/m^2."""
        e = _estimate(self.spectral_efficiency(eta))
        lam = self.cfg.lambda_u
        return Estimate(lam * e.mean, lam * e.half_width)

    def apt(self, eta, gamma0):
        """APT formula evaluated on the empirical coverage components (bit/s/m^2)."""
        from .metrics import PartitionPoint, apt_from_coverage
        cov = {TierLink(t, s): self.coverage(TierLink(t, s), gamma0).mean
               for t in (SBS, MBS, BACKHAUL) for s in (LOS, NLOS)}
        return apt_from_coverage(PartitionPoint(eta, self.C), gamma0, self.cfg, cov)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["drop", "tier", "state", "sinr", "bh_state", "bh_sinr", "hit"])
            for i in range(self.size):
                w.writerow([i, int(self.tier[i]), int(self.state[i]), f"{self.sinr[i]:.9e}",
                            int(self.bh_state[i]), f"{self.bh_sinr[i]:.9e}", int(self.hit[i])])


# ---------------------------------------------------------------------------
# pinned-distance estimators


def _interference_sample(rng, link, r, cfg, C, R, far):
    """Aggregate interference at the typical receiver given the serving link at distance r.

    Interferers of each class are kept only beyond the class exclusion
    distance, matching the conditioning used by the analysis.
    """
    total = 0.0
    for other in interferers(link):
        lam = tier_density(other.tier, cfg)
        p = link_power(other.tier, cfg, C)
        if lam <= 0 or p <= 0:
            continue
        d = float(exclusion_distance(link, other, r, cfg, C))
        if other.state is LOS:
            u, los = _place(rng, lam, R, far, cfg, inner=d)
        else:
            u, los = _place(rng, lam, R, 0.0, cfg, inner=d)
        u = u[los] if other.state is LOS else u[~los]
        A, alpha = path_params(other.state, cfg)
        total += float(np.sum(p * A * (u / cfg.ref_distance) ** -alpha * rng.exponential(1.0, u.size)))
    return total


def _pinned_window(link, r, cfg, C, spec):
    base = spec.radius(cfg)
    d = max((float(exclusion_distance(link, o, r, cfg, C)) for o in interferers(link)
             if math.isfinite(float(exclusion_distance(link, o, r, cfg, C)))), default=0.0)
    return max(base, 4.0 * d), max(spec.far_window, base, 4.0 * d)


def empirical_laplace(link, gamma, r, cfg, spec=SimSpec(drops=4000), C=None):
    """Monte-Carlo E[exp(-gamma I / S(r))] with the serving node pinned at distance r."""
    C = cfg.C if C is None else C
    S = float(received_power(link, r, cfg, C))
    if S <= 0:
        raise ValueError("serving link has no transmit power")
    R, far = _pinned_window(link, r, cfg, C, spec)
    vals = np.empty(spec.drops)
    for i in range(spec.drops):
        rng = drop_rng(spec.seed, i)
        vals[i] = math.exp(-gamma * _interference_sample(rng, link, r, cfg, C, R, far) / S)
    return _estimate(vals)


def pinned_coverage(link, gamma, r, cfg, spec=SimSpec(drops=4000), C=None):
    """Monte-Carlo P[SINR > gamma | serving link at distance r] with Rayleigh signal fading."""
    C = cfg.C if C is None else C
    S = float(received_power(link, r, cfg, C))
    R, far = _pinned_window(link, r, cfg, C, spec)
    hits = np.empty(spec.drops, dtype=bool)
    for i in range(spec.drops):
        rng = drop_rng(spec.seed, i)
        I = _interference_sample(rng, link, r, cfg, C, R, far)
        hits[i] = S * rng.exponential(1.0) > gamma * (I + cfg.N0)
    return _estimate(hits)


__all__ = [
    "SimSpec", "DropTable", "Estimate", "run_drops", "simulate_drop", "drop_rng",
    "empirical_laplace", "pinned_coverage",
]
