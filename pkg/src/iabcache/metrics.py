"""Average potential throughput, spectral-efficiency distributions and area spectral efficiency.

Per-user spectral efficiency on an SBS is the smaller of the access and the
cache-scaled backhaul efficiency, ``min(eta log2(1+SINR_a), (1-eta)/(1-p_h)
log2(1+SINR_bh))``.  With independent access and backhaul links the
distance integrals of the ASE separate, so

    A_s = lambda  int_0^inf  c_s(rho/eta) c_bh((1-p_h) rho/(1-eta)) d rho

where ``c_k(x)`` is the marginal coverage of tier k at threshold 2^x - 1.
The curves are tabulated once per power configuration and interpolated.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .config import BACKHAUL, LOS, MBS, NLOS, SBS, TierLink
from .coverage import DEFAULT_RADIAL, DENSITY_FLOOR, _noise_factor, conditional_coverage_grid, coverage_curve
from .geometry import _association_density, serving_radius, tier_density
from .interference import _interference_limited_exponent
from .model import cache_hit_ratio, sbs_transmit_power
from .quadrature import QuadSpec, composite_rule, integrate


@dataclass(frozen=True)
class PartitionPoint:
    eta: float
    C: int

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if int(self.C) != self.C or self.C < 0:
            raise ValueError("C must be a non-negative integer")

    def check(self, cfg):
        if self.C > cfg.F:
            raise ValueError(f"cache capacity {self.C} exceeds library size {cfg.F}")
        return self


@dataclass(frozen=True)
class AptResult:
    """Average potential throughput in bit/s per m^2."""

    sbs: dict
    mbs: dict

    @property
    def sbs_total(self):
        return sum(self.sbs.values())

    @property
    def mbs_total(self):
        return sum(self.mbs.values())

    @property
    def total(self):
        return self.sbs_total + self.mbs_total


@dataclass(frozen=True)
class AseResult:
    """Area spectral efficiency in bit/s/Hz per m^2."""

    sbs: float
    mbs: float

    @property
    def total(self):
        return self.sbs + self.mbs


def _as_point(p, cfg):
    if not isinstance(p, PartitionPoint):
        p = PartitionPoint(*p)
    return p.check(cfg)


def hit_ratio(p, cfg):
    return cache_hit_ratio(p.C, cfg.F, cfg.gamma_p)


# ---------------------------------------------------------------------------
# APT


def apt(p, gamma0, cfg):
    """Average potential throughput at SINR threshold ``gamma0`` (linear)."""
    p = _as_point(p, cfg)
    if gamma0 < 0:
        raise ValueError("threshold must be non-negative")
    cov = {link: float(coverage_curve(link, [gamma0], cfg, p.C)[0])
           for link in (TierLink(t, s) for t in (SBS, MBS, BACKHAUL) for s in (LOS, NLOS))}
    return apt_from_coverage(p, gamma0, cfg, cov)


def apt_from_coverage(p, gamma0, cfg, cov):
    """APT given the six coverage components at ``gamma0``, keyed by TierLink."""
    ph = hit_ratio(p, cfg)
    se = math.log2(1.0 + gamma0)
    access_scale = cfg.lambda_s * p.eta * cfg.W * se
    sbs = {}
    for sa in (LOS, NLOS):
        access = access_scale * cov[TierLink(SBS, sa)]
        for sb in (LOS, NLOS):
            if ph >= 1.0:
                backhaul = math.inf
            else:
                backhaul = cfg.lambda_m * (1.0 - p.eta) * cfg.W * se * cov[TierLink(BACKHAUL, sb)] / (1.0 - ph)
            sbs[sa.value.lower() + sb.value.lower()[0]] = min(access, backhaul)
    # keys: "ll", "ln", "nll" -> normalise to two letters
    sbs = {_case_key(k): v for k, v in sbs.items()}
    m_scale = cfg.lambda_m * p.eta * cfg.W * se
    mbs = {"L": m_scale * cov[TierLink(MBS, LOS)], "NL": m_scale * cov[TierLink(MBS, NLOS)]}
    return AptResult(sbs, mbs)


def _case_key(raw):
    return {"ll": "ll", "ln": "ln", "nll": "nl", "nln": "nn"}[raw]


# ---------------------------------------------------------------------------
# spectral-efficiency distributions


def _se_threshold(rho, share):
    # 2^(rho/share) - 1, infinite for share 0 and rho > 0
    if rho == 0:
        return 0.0
    if share <= 0:
        return math.inf
    return math.expm1(rho / share * math.log(2.0))


def _cond(link, gamma, r, cfg, C):
    if gamma == 0:
        return 1.0
    if math.isinf(gamma):
        return 0.0
    return float(conditional_coverage_grid(link, [gamma], [r], cfg, C)[0, 0])


def rate_ccdf_sbs(rho, r_s, r_bh, p, cfg):
    """P[R_s > rho | r_s, r_bh] for the four (access, backhaul) state pairs."""
    p = _as_point(p, cfg)
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if not (r_s > 0 and r_bh > 0):
        raise ValueError("distances must be positive")
    ph = hit_ratio(p, cfg)
    g_a = _se_threshold(rho, p.eta)
    g_b = 0.0 if ph >= 1.0 else _se_threshold((1.0 - ph) * rho, 1.0 - p.eta)
    out = {}
    for sa in (LOS, NLOS):
        pa = _cond(TierLink(SBS, sa), g_a, r_s, cfg, p.C)
        for sb in (LOS, NLOS):
            out[(sa, sb)] = pa * _cond(TierLink(BACKHAUL, sb), g_b, r_bh, cfg, p.C)
    return out


def rate_ccdf_mbs(rho, r_m, p, cfg):
    """P[R_m > rho | r_m] for LoS and NLoS access."""
    p = _as_point(p, cfg)
    if rho < 0:
        raise ValueError("rho must be non-negative")
    g = _se_threshold(rho, p.eta)
    return {s: _cond(TierLink(MBS, s), g, r_m, cfg, p.C) for s in (LOS, NLOS)}


# ---------------------------------------------------------------------------
# tabulated coverage in spectral-efficiency coordinates


@dataclass(frozen=True)
class SpectralCurve:
    """c(x) = coverage at threshold 2^x - 1 on a uniform grid, zero beyond ``x_max``."""

    x: np.ndarray
    y: np.ndarray

    @functools.cached_property
    def _spline(self):
        return CubicSpline(self.x, self.y)

    @property
    def x_max(self):
        return float(self.x[-1])

    @property
    def at_zero(self):
        return float(self.y[0])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = x <= self.x_max
        out = np.zeros(x.shape)
        if np.any(inside):
            out[inside] = np.clip(self._spline(x[inside]), 0.0, None)
        return out

    def integral(self):
        """int_0^inf c(x) dx."""
        return float(self._spline.integrate(0.0, self.x_max))

    def __hash__(self):
        return id(self)


X_STEP = 0.1
X_FLOOR = 1e-8


def _curve_values(link, gammas, cfg, C, mode):
    if mode == "general":
        return coverage_curve(link, gammas, cfg, C)
    if tier_density(link.tier, cfg) <= 0:
        return np.zeros(gammas.shape)
    r, w = DEFAULT_RADIAL.nodes_for(link, cfg)
    dens = _association_density(link, r, cfg, C) * w
    keep = dens > DENSITY_FLOOR
    r, dens = r[keep], dens[keep]
    if mode == "noise":
        cond = _noise_factor(link, gammas[:, None], r[None, :], cfg, C)
    elif mode == "intlimited":
        # LoS SBS access only; noise dropped, LoS-only interference
        cond = np.exp(-_interference_limited_exponent(gammas[:, None], r[None, :], cfg, C))
    else:
        raise ValueError(mode)
    return cond @ dens


def _curve_key(cfg, link, C):
    # coverage depends on C only through the SBS transmit power; the backhaul
    # link never sees the SBS tier
    C_eff = 0 if link.tier is BACKHAUL else int(C)
    return cfg.replace(C=0, gamma_p=0.6, lambda_u=cfg.lambda_u), C_eff


@functools.lru_cache(maxsize=512)
def _spectral_curve_cached(cfg, link, mode, C):
    xs, values = [], []
    x0, span = 0.0, 16.0
    while True:
        start = x0 if not xs else x0 + X_STEP
        x = np.arange(start, x0 + span + X_STEP / 2, X_STEP)
        g = np.expm1(x * math.log(2.0))
        y = _curve_values(link, g, cfg, C, mode)
        xs.append(x)
        values.append(y)
        head = values[0][0]
        if y[-1] <= X_FLOOR * max(head, 1e-300) or x[-1] >= 96.0:
            break
        x0 = x[-1]
    return SpectralCurve(np.concatenate(xs), np.concatenate(values))


def spectral_curve(link, cfg, C=None, mode="general"):
    """Tabulated coverage of one serving link in spectral-efficiency coordinates."""
    C = cfg.C if C is None else C
    key_cfg, C_eff = _curve_key(cfg, link, C)
    return _spectral_curve_cached(key_cfg, link, mode, C_eff)


def tier_curve(tier, cfg, C=None, mode="general"):
    """Summed LoS + NLoS spectral curve of a tier."""
    a = spectral_curve(TierLink(tier, LOS), cfg, C, mode)
    b = spectral_curve(TierLink(tier, NLOS), cfg, C, mode)
    if a.x.size != b.x.size:
        n = max(a.x.size, b.x.size)
        x = np.arange(n) * X_STEP
        return SpectralCurve(x, a(x) + b(x))
    return SpectralCurve(a.x, a.y + b.y)


# ---------------------------------------------------------------------------
# ASE


RHO_PANELS = 64
RHO_NODES = 8


def _product_integral(f_a, scale_a, f_b, scale_b):
    """int_0^inf f_a(rho/scale_a) f_b(rho/scale_b) d rho; scale_b = inf drops the f_b factor.

    An infinite backhaul scale means every request hits the cache, so the
    backhaul link never limits the rate.
    """
    if scale_a <= 0 or scale_b <= 0:
        return 0.0
    top = scale_a * f_a.x_max
    if math.isfinite(scale_b):
        top = min(top, scale_b * f_b.x_max)
    rho, w = composite_rule(np.linspace(0.0, top, RHO_PANELS + 1), RHO_NODES)
    fb = f_b(rho / scale_b) if math.isfinite(scale_b) else 1.0
    return float(np.sum(w * f_a(rho / scale_a) * fb))


def _sbs_ase(p, cfg, access_curve, backhaul_curve):
    ph = hit_ratio(p, cfg)
    if p.eta <= 0 or sbs_transmit_power(cfg, p.C) <= 0:
        return 0.0
    if ph >= 1.0:
        scale_b = math.inf
    else:
        if p.eta >= 1.0:
            return 0.0
        scale_b = (1.0 - p.eta) / (1.0 - ph)
    return cfg.lambda_u * _product_integral(access_curve, p.eta, backhaul_curve, scale_b)


def _mbs_ase(p, cfg, curve):
    return cfg.lambda_u * p.eta * curve.integral()


def ase(p, cfg, method="factorized", spec=QuadSpec(rel_tol=1e-4, abs_tol=1e-14)):
    """Area spectral efficiency at a partition point.

    ``method="nested"`` integrates the original form (outer r_bh, middle r_s,
    inner rho) by adaptive quadrature; it is orders of magnitude slower.
    """
    p = _as_point(p, cfg)
    if method == "nested":
        return _ase_nested(p, cfg, spec)
    if method != "factorized":
        raise ValueError(f"unknown method {method!r}")
    return AseResult(
        _sbs_ase(p, cfg, tier_curve(SBS, cfg, p.C), tier_curve(BACKHAUL, cfg, p.C)),
        _mbs_ase(p, cfg, tier_curve(MBS, cfg, p.C)),
    )


def ase_noise_limited(p, cfg):
    """ASE with all interference removed from access and backhaul links."""
    p = _as_point(p, cfg)
    return AseResult(
        _sbs_ase(p, cfg, tier_curve(SBS, cfg, p.C, "noise"), tier_curve(BACKHAUL, cfg, p.C, "noise")),
        _mbs_ase(p, cfg, tier_curve(MBS, cfg, p.C, "noise")),
    )


def ase_interference_limited(p, cfg):
    """ASE with the SBS tier reduced to LoS access under LoS-only interference and no noise."""
    p = _as_point(p, cfg)
    access = spectral_curve(TierLink(SBS, LOS), cfg, p.C, "intlimited")
    return AseResult(
        _sbs_ase(p, cfg, access, tier_curve(BACKHAUL, cfg, p.C)),
        _mbs_ase(p, cfg, tier_curve(MBS, cfg, p.C)),
    )


RHO_CUT = 1e-8


def _ccdf_profile(link, share, r, cfg, C):
    """Nodes, weights and conditional ccdf P[share log2(1+SINR) > rho | r] on [0, top].

    ``top`` is where the ccdf first drops below RHO_CUT; the ccdf decays
    doubly exponentially in rho so a Gauss-Legendre rule on [0, top] is enough.
    """
    top = share
    while _cond(link, _se_threshold(top, share), r, cfg, C) > RHO_CUT and top < 128 * share:
        top *= 2.0
    rho, w = composite_rule(np.linspace(0.0, top, RHO_PANELS // 4 + 1), RHO_NODES * 2)
    g = np.expm1(rho / share * math.log(2.0))
    vals = conditional_coverage_grid(link, g, [r], cfg, C)[:, 0]
    return rho, w, vals


def _ase_nested(p, cfg, spec):
    """Nested quadrature in the original order: outer r_bh, middle r_s, inner rho."""
    ph = hit_ratio(p, cfg)
    C = p.C
    middle = spec.inner(0.3)
    access_cache = {}

    def access(state, r):
        key = (state, r)
        if key not in access_cache:
            access_cache[key] = _ccdf_profile(TierLink(SBS, state), p.eta, r, cfg, C)
        return access_cache[key]

    def backhaul_ccdf(state, rho, r):
        g = np.expm1((1.0 - ph) * rho / (1.0 - p.eta) * math.log(2.0))
        return conditional_coverage_grid(TierLink(BACKHAUL, state), g, [r], cfg, C)[:, 0]

    def density(link, r):
        return float(_association_density(link, np.array(r), cfg, C))

    def sbs_part():
        if p.eta <= 0 or sbs_transmit_power(cfg, C) <= 0 or (p.eta >= 1 and ph < 1):
            return 0.0
        R_bh = serving_radius(TierLink(BACKHAUL, LOS), cfg, 1e-12)
        R_s = serving_radius(TierLink(SBS, LOS), cfg, 1e-12)

        if ph >= 1.0:
            # no backhaul traffic: the access link alone sets the rate
            def over_rs_only(r_s):
                total = 0.0
                for sa in (LOS, NLOS):
                    fa = density(TierLink(SBS, sa), r_s)
                    if fa:
                        rho, w, pa = access(sa, r_s)
                        total += fa * float(np.sum(w * pa))
                return total

            return integrate(over_rs_only, 0.0, R_s, spec, points=[cfg.los_radius]).value

        def over_rbh(r_bh):
            fb = {sb: density(TierLink(BACKHAUL, sb), r_bh) for sb in (LOS, NLOS)}

            def over_rs(r_s):
                total = 0.0
                for sa in (LOS, NLOS):
                    fa = density(TierLink(SBS, sa), r_s)
                    if fa == 0:
                        continue
                    rho, w, pa = access(sa, r_s)
                    for sb in (LOS, NLOS):
                        if fb[sb] == 0:
                            continue
                        total += fa * fb[sb] * float(np.sum(w * pa * backhaul_ccdf(sb, rho, r_bh)))
                return total

            return integrate(over_rs, 0.0, R_s, middle, points=[cfg.los_radius]).value

        return integrate(over_rbh, 0.0, R_bh, spec, points=[cfg.los_radius]).value

    def mbs_part():
        if p.eta <= 0 or tier_density(MBS, cfg) <= 0:
            return 0.0
        R_m = serving_radius(TierLink(MBS, LOS), cfg, 1e-12)

        def over_rm(r):
            total = 0.0
            for s in (LOS, NLOS):
                f = density(TierLink(MBS, s), r)
                if f:
                    _, w, vals = _ccdf_profile(TierLink(MBS, s), p.eta, r, cfg, C)
                    total += f * float(np.sum(w * vals))
            return total

        return integrate(over_rm, 0.0, R_m, spec, points=[cfg.los_radius]).value

    return AseResult(cfg.lambda_u * sbs_part(), cfg.lambda_u * mbs_part())


# ---------------------------------------------------------------------------
# partition optimisation


def _objective_fn(objective, C, cfg, gamma0):
    if objective == "ase":
        s_curve = tier_curve(SBS, cfg, C)
        b_curve = tier_curve(BACKHAUL, cfg, C)
        m_curve = tier_curve(MBS, cfg, C)

        def f(eta):
            pt = PartitionPoint(eta, C)
            return _sbs_ase(pt, cfg, s_curve, b_curve) + _mbs_ase(pt, cfg, m_curve)

        return f
    if objective == "apt":
        if gamma0 is None:
            raise ValueError("the APT objective needs gamma0")
        cov = {link: float(coverage_curve(link, [gamma0], cfg, C)[0])
               for link in (TierLink(t, s) for t in (SBS, MBS, BACKHAUL) for s in (LOS, NLOS))}
        return lambda eta: apt_from_coverage(PartitionPoint(eta, C), gamma0, cfg, cov).total
    raise ValueError(f"unknown objective {objective!r}")


def optimal_partition(C, cfg, objective="ase", gamma0=None, step=0.01, tol=1e-3, refine=True):
    """Best access share eta on a grid, refined by golden-section search.

    Grid ties go to the smaller eta.  Returns ``(eta_star, value)``.
    """
    if step <= 0 or step > 1:
        raise ValueError("grid step must lie in (0, 1]")
    f = _objective_fn(objective, C, cfg, gamma0)
    n = int(round(1.0 / step))
    grid = np.linspace(0.0, 1.0, n + 1)
    vals = np.array([f(e) for e in grid])
    i = int(np.argmax(vals))
    best_eta, best_val = float(grid[i]), float(vals[i])
    if not refine or best_val <= 0:
        return best_eta, best_val
    lo, hi = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, n)])
    eta, val = golden_section_max(f, lo, hi, tol)
    if val > best_val:
        return eta, val
    return best_eta, best_val


def golden_section_max(f, lo, hi, tol=1e-3):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def saved_spectrum(C, cfg, step=0.01, refine=False):
    """Access share gained by caching: eta*(C) - eta*(0) under the ASE objective."""
    eta_c, _ = optimal_partition(C, cfg, "ase", step=step, refine=refine)
    eta_0, _ = optimal_partition(0, cfg, "ase", step=step, refine=refine)
    return eta_c - eta_0
