import math
from dataclasses import replace

import numpy as np
import pytest

from nrradar.chain import ChainOptions
from nrradar.channel import UMA, UMI, Scenario
from nrradar.montecarlo import (CodebookSpec, DropRecord, RunConfig, aggregate, drop_target,
                                link_budget, roc_sweep, run_campaign)

FAST = RunConfig(uav_heights_m=(50.0,), drops_per_config=6,
                 codebook=CodebookSpec(n_az=11, n_el=12),
                 chain=ChainOptions(sweep_mode="statistic"))


def test_disc_drop_moments_and_bounds():
    sc = Scenario(UMA)
    rng = np.random.default_rng(0)
    pts = np.array([drop_target(sc, 50, rng, cell_shape="disc").position_m for _ in range(10000)])
    d2d = np.hypot(pts[:, 0], pts[:, 1])
    assert np.all((d2d >= 10) & (d2d <= 250)) and np.all(pts[:, 2] == 50)
    assert d2d.mean() == pytest.approx(2 / 3 * 250, rel=0.01)


def test_sector_and_hexagon_drops():
    sc = Scenario(UMI)
    rng = np.random.default_rng(1)
    pts = [drop_target(sc, 25, rng).position_m for _ in range(2000)]
    az = [math.atan2(y, x) for x, y, _ in pts]
    assert max(abs(a) for a in az) <= math.radians(60) + 1e-12
    for _ in range(2000):
        x, y, _ = drop_target(sc, 25, rng, cell_shape="hexagon").position_m
        assert 10 <= math.hypot(x, y) <= 100 / math.cos(math.pi / 6) + 1e-9
        assert abs(y) <= 100 + 1e-9
    with pytest.raises(ValueError):
        drop_target(sc, 0.0, rng)


def test_unambiguous_range_margin():
    # farthest UMi drop at 200 m height
    assert math.hypot(100, 190) == pytest.approx(214.7, abs=0.05)
    assert math.hypot(100, 190) < 3e8 / (2 * 4 * 120e3)


def test_link_budget_values():
    tx, std = link_budget(RunConfig())
    assert tx == pytest.approx(44.897, abs=1e-3)
    thermal = -174 + 10 * math.log10(4 * 120e3 * 198)
    assert thermal == pytest.approx(-94.2, abs=0.05)
    noise_dbm = thermal + 10
    assert 20 * math.log10(std * 1024) == pytest.approx(noise_dbm - tx)
    wide = RunConfig(prs=replace(RunConfig().prs, n_rb=132))
    assert 20 * math.log10(link_budget(wide)[1] / std) == pytest.approx(10 * math.log10(2), abs=1e-9)


def test_run_config_invariants():
    for kw in (dict(drops_per_config=0), dict(eirp_dbm=76), dict(cell_shape="square"),
               dict(uav_heights_m=()), dict(workers=0), dict(min_distance_m=150)):
        with pytest.raises(ValueError):
            RunConfig(**kw)


def test_campaign_determinism_and_order_invariance():
    a = run_campaign(FAST)
    b = run_campaign(FAST)
    assert a == b
    c = run_campaign(replace(FAST, workers=2))
    assert [r.drop_id for r in c] == list(range(6)) and c == a
    d = run_campaign(replace(FAST, master_seed=1))
    assert d != a


def test_campaign_without_target():
    recs = run_campaign(replace(FAST, with_target=False))
    assert all(not r.target_present and r.position_error_m is None for r in recs)
    s = aggregate(recs)
    assert s.groups[0].p_md is None
    assert s.groups[0].p_fa == pytest.approx(np.mean([r.detected for r in recs]))


def test_error_present_iff_detected_with_target():
    for r in run_campaign(FAST):
        assert (r.position_error_m is not None) == (r.detected and r.target_present)


def test_drop_failure_recorded(monkeypatch):
    import nrradar.montecarlo as mc

    def boom(*a, **k):
        raise RuntimeError("synthetic")
    monkeypatch.setattr(mc, "process_drop", boom)
    recs = run_campaign(replace(FAST, drops_per_config=2))
    assert all(r.status == "error: synthetic" for r in recs)
    assert aggregate(recs).groups[0].n_failed == 2


def _rec(i, detected, err, present=True, par=5.0):
    return DropRecord(i, UMI, 25.0, present, (0, 0, 25) if present else None, True, detected, par,
                      position_error_m=err)


def test_aggregate_trivial_cases():
    s = aggregate([_rec(i, True, 0.0) for i in range(4)])
    g = s.groups[0]
    assert g.p_md == 0 and g.error_cdf == [0.0] * 4 and g.error_quantiles_m["p50"] == 0.0
    s = aggregate([_rec(0, True, 1.0), _rec(1, False, None)])
    assert s.groups[0].p_md == 0.5
    s = aggregate([_rec(0, False, None)])
    assert s.groups[0].error_quantiles_m == {"p50": None, "p90": None, "p99": None}
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_cdf_non_decreasing():
    rng = np.random.default_rng(0)
    recs = [_rec(i, True, float(e)) for i, e in enumerate(rng.exponential(2, 50))]
    cdf = aggregate(recs).groups[0].error_cdf
    assert all(a <= b for a, b in zip(cdf, cdf[1:]))


def test_roc_sweep_properties():
    rng = np.random.default_rng(3)
    tgt = [_rec(i, False, None, par=float(p)) for i, p in enumerate(rng.normal(6, 2, 200))]
    non = [_rec(i, False, None, present=False, par=float(p)) for i, p in enumerate(rng.normal(0.4, 0.1, 200))]
    grid = np.linspace(-1, 10, 45)
    rows = roc_sweep(tgt, non, [-math.inf, *grid, math.inf])
    assert rows[0][1:] == (1.0, 1.0) and rows[-1][1:] == (0.0, 0.0)
    pfa = [r[1] for r in rows]
    pd = [r[2] for r in rows]
    assert all(a >= b for a, b in zip(pfa, pfa[1:])) and all(a >= b for a, b in zip(pd, pd[1:]))
    with pytest.raises(ValueError):
        roc_sweep([], non, grid)


def test_roc_coherent_with_aggregate():
    recs = run_campaign(replace(FAST, drops_per_config=8))
    non = run_campaign(replace(FAST, drops_per_config=8, with_target=False))
    (_, _, pd), = roc_sweep(recs, non, [FAST.eta_db])
    assert pd == pytest.approx(1 - aggregate(recs).groups[0].p_md)
