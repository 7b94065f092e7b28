import numpy as np
import pytest

from iabcache.config import BACKHAUL, LOS, MBS, SBS, TierLink
from iabcache.coverage import (conditional_coverage, conditional_coverage_grid, coverage,
                               coverage_curve, coverage_table, db_to_linear, linear_to_db)
from iabcache.geometry import ALL_LINKS, association_mass


def test_db_round_trip():
    assert float(db_to_linear(10)) == pytest.approx(10.0)
    assert float(linear_to_db(100.0)) == pytest.approx(20.0)


def test_fixed_matches_adaptive(cfg):
    fixed = coverage(SBS, 10.0, cfg)
    adaptive = coverage(SBS, 10.0, cfg, method="adaptive")
    assert fixed.los == pytest.approx(adaptive.los, rel=1e-6)
    assert fixed.total == pytest.approx(adaptive.total, rel=1e-6)


@pytest.mark.parametrize("link", ALL_LINKS, ids=lambda l: l.label)
def test_zero_threshold_is_association_mass(cfg, link):
    assert float(coverage_curve(link, [0.0], cfg)[0]) == pytest.approx(association_mass(link, cfg), rel=1e-6, abs=1e-12)


@pytest.mark.parametrize("link", ALL_LINKS, ids=lambda l: l.label)
def test_coverage_monotone(cfg, link):
    vals = coverage_curve(link, db_to_linear(np.arange(-10, 31, 2.5)), cfg)
    assert np.all(np.diff(vals) <= 1e-15) and np.all(vals >= 0)


def test_conditional_coverage(cfg):
    link = TierLink(MBS, LOS)
    direct = conditional_coverage(link, 5.0, 60.0, cfg)
    grid = conditional_coverage_grid(link, [5.0], [60.0], cfg)[0, 0]
    assert grid == pytest.approx(direct, rel=1e-7)
    assert conditional_coverage(link, 0.0, 60.0, cfg) == 1.0
    with pytest.raises(ValueError):
        conditional_coverage(link, -1.0, 60.0, cfg)


def test_silent_sbs_tier(light_cfg):
    # past the power budget the SBS tier neither serves nor covers
    assert coverage(SBS, 1.0, light_cfg, C=700).total == 0.0
    assert coverage(MBS, 1.0, light_cfg, C=700).total > coverage(MBS, 1.0, light_cfg, C=0).total


def test_table_rows(cfg):
    rows = coverage_table(["s", "bh"], [0, 10], cfg)
    assert len(rows) == 2 * 2 * 3
    tier, state, g, p = rows[2]
    assert state is None and p == pytest.approx(rows[0][3] + rows[1][3])
    assert coverage_table([SBS], [], cfg) == []


def test_tier_parse_in_coverage(cfg):
    assert coverage("backhaul", 1.0, cfg).tier is BACKHAUL
    with pytest.raises(ValueError):
        coverage(SBS, 1.0, cfg, method="magic")
