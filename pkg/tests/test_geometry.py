import math

import numpy as np
import pytest

from iabcache.config import BACKHAUL, LOS, MBS, NLOS, SBS, NetworkConfig, TierLink
from iabcache.geometry import (ALL_LINKS, EXCLUSION_KINDS, association_density, association_mass,
                               exclusion_distance, exclusion_probability, exclusion_kinds_for,
                               nearest_distance_pdf)
from iabcache.model import link_power, los_probability
from iabcache.quadrature import QuadSpec, integrate


def test_nearest_pdf_formula(cfg):
    r = 30.0
    expected = los_probability(r, 0.027) * math.exp(-math.pi * 900 * 1e-4) * 2 * math.pi * 30 * 1e-4
    assert float(nearest_distance_pdf(TierLink(SBS, LOS), r, cfg)) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("tier", [SBS, MBS, BACKHAUL])
def test_nearest_pdfs_normalised(cfg, tier):
    f = lambda r: float(nearest_distance_pdf(TierLink(tier, LOS), r, cfg)
                        + nearest_distance_pdf(TierLink(tier, NLOS), r, cfg))
    assert integrate(f, 0.0, math.inf, QuadSpec(rel_tol=1e-10), points=[18.0]).value == pytest.approx(1, abs=1e-6)
    with pytest.raises(ValueError):
        nearest_distance_pdf(TierLink(tier, LOS), 0.0, cfg)


def test_fourteen_kinds():
    assert len(EXCLUSION_KINDS) == 14
    assert sum(len(exclusion_kinds_for(l)) for l in ALL_LINKS) == 14
    with pytest.raises(KeyError):
        exclusion_probability("xx_ss", 10.0, NetworkConfig())


def test_degenerate_path_loss(cfg):
    c = cfg.replace(A_NL=cfg.A_L, alpha_NL=cfg.alpha_L)
    r = 40.0
    assert float(exclusion_probability("ln_ss", r, c)) == pytest.approx(math.exp(-1e-4 * math.pi * r * r))


def test_equal_biased_powers(cfg):
    # B_m chosen so that P_s B_s = P_m B_m
    ratio = link_power(SBS, cfg) / link_power(MBS, cfg.replace(B_m=1.0))
    c = cfg.replace(B_m=ratio)
    r = 55.0
    assert float(exclusion_probability("ll_sm", r, c)) == pytest.approx(math.exp(-1e-5 * math.pi * r * r))


def test_ln_sm_formula(cfg):
    ref = cfg.ref_distance
    ps, pm = link_power(SBS, cfg), link_power(MBS, cfg)
    d = ref * (ps * cfg.A_L / (pm * cfg.A_NL)) ** (-1 / cfg.alpha_NL) * (20 / ref) ** (cfg.alpha_L / cfg.alpha_NL)
    assert float(exclusion_probability("ln_sm", 20.0, cfg)) == pytest.approx(math.exp(-1e-5 * math.pi * d * d))


@pytest.mark.parametrize("kind", sorted(EXCLUSION_KINDS))
def test_exclusion_monotone_and_bounded(cfg, kind):
    r = np.geomspace(0.5, 2000, 300)
    p = exclusion_probability(kind, r, cfg)
    assert np.all((p >= 0) & (p <= 1))
    assert np.all(np.diff(p) <= 1e-15)
    serving, other = EXCLUSION_KINDS[kind]
    d = exclusion_distance(serving, other, r, cfg)
    assert np.all(np.diff(d) >= 0)


@pytest.mark.parametrize("kind", sorted(EXCLUSION_KINDS))
def test_ratio_invariance(cfg, kind):
    scaled = cfg.replace(B_s=cfg.B_s * 7.0, B_m=cfg.B_m * 7.0)
    r = np.array([3.0, 30.0, 300.0])
    assert np.allclose(exclusion_probability(kind, r, cfg), exclusion_probability(kind, r, scaled), rtol=1e-12)


def test_vanishing_mbs_tier(cfg):
    c = cfg.replace(lambda_m=0.0)
    r = np.array([5.0, 50.0, 150.0])
    expected = exclusion_probability("ln_ss", r, c) * nearest_distance_pdf(TierLink(SBS, LOS), r, c)
    assert np.allclose(association_density(TierLink(SBS, LOS), r, c), expected, rtol=1e-14)


def test_backhaul_los_density(cfg):
    r = 100.0
    expected = exclusion_probability("ln_bh", r, cfg) * nearest_distance_pdf(TierLink(BACKHAUL, LOS), r, cfg)
    assert float(association_density(TierLink(BACKHAUL, LOS), r, cfg)) == pytest.approx(float(expected))


def test_association_density_decay(cfg):
    r = np.array([500.0, 1000.0, 2000.0])
    for link in ALL_LINKS:
        d = association_density(link, r, cfg)
        assert np.all(d >= 0) and d[-1] * 2000 ** 6 < 1e-3


def test_association_mass_recorded(cfg):
    masses = {l.label: association_mass(l, cfg) for l in ALL_LINKS}
    access = sum(v for k, v in masses.items() if not k.startswith("bh"))
    # the product construction is not normalised; record, do not force to 1
    assert 0.2 < access < 1.0
    assert masses["s_L"] > masses["s_NL"]
