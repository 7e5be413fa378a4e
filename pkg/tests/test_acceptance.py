"""Acceptance criteria. Each test reports one PASS/FAIL/SKIP line in the terminal summary.

Desk-scale campaigns (criteria 4 to 6) use the statistic sweep mode, whose
equivalence in distribution to the explicit sweep is covered in test_chain.py.
Set NRRADAR_FULL_CAMPAIGN=1 to run the optional 4000-drop campaign (criterion 7).
"""

import math
import os
import time
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from nrradar.antenna import ArrayGeometry, Direction
from nrradar.chain import (ChainOptions, clutter_suppress, matched_filter, observe_dwell,
                           position_estimate, process_drop, range_bin_width, range_profile)
from nrradar.channel import (UMA, UMI, ChannelRealization, PathComponent, Scenario,
                             geometry_to)
from nrradar.cli import main
from nrradar.constants import SPEED_OF_LIGHT
from nrradar.montecarlo import (RunConfig, aggregate, build_codebook, roc_sweep,
                                run_campaign)
from nrradar.prs import PrsConfig, build_prs_grid, gold_sequence
from nrradar.results import write_records
from oracles import gold_oracle, observation_oracle

STAT = ChainOptions(sweep_mode="statistic")
HEIGHTS = (25.0, 50.0, 100.0, 200.0)
DESK_DROPS = 500


def _verdict(report, criterion, checks):
    """checks: list of (name, ok, detail). Reports once and asserts all."""
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{n}={'ok' if o else 'FAIL'} ({d})" for n, o, d in checks)
    report(criterion, ok, detail)
    failed = [n for n, o, _ in checks if not o]
    assert not failed, f"criterion {criterion} failed: {failed}: {detail}"


# --- 1. DSP exactness ------------------------------------------------------------

_static = arrays(np.complex128, st.tuples(st.integers(1, 8), st.just(1)),
                 elements=st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))


def test_criterion_1_dsp_exactness(report):
    t0 = time.perf_counter()
    bad = []

    @settings(max_examples=200, deadline=None, database=None)
    @given(_static, st.integers(2, 64))
    def static_zero(col, n):
        x = np.repeat(col, n, axis=1)
        if not np.array_equal(clutter_suppress(x), np.zeros_like(x)):
            bad.append("suppress")

    prs = PrsConfig(n_prs=4)
    df = prs.comb_k * prs.scs_hz
    half_bin = SPEED_OF_LIGHT / (4 * prs.n_active * df)
    geo = ArrayGeometry(2, 2)
    from nrradar.antenna import dft_codebook
    cb = dft_codebook(geo, 1, 1, (0.0, 0.0), (0.0, 0.0))
    worst = [0.0]

    @settings(max_examples=100, deadline=None, database=None)
    @given(st.floats(0.0, 312.49))
    def range_error(r):
        ch = ChannelRealization((PathComponent(2 * r / SPEED_OF_LIGHT, cb.direction(0), 1.0,
                                               doppler_hz=1000.0),))
        y, s = observe_dwell(ch, prs, cb, 0, 0.0)
        h = clutter_suppress(matched_filter(y, s, prs.beta), np.arange(y.shape[1]) % prs.l_prs)
        prof = range_profile(h, prs.n_active, df)
        r_hat = int(np.argmax(prof.averaged)) * prof.bin_width_m
        err = abs(r_hat - r)
        err = min(err, abs(err - prs.n_active * prof.bin_width_m))  # wrap at the ambiguity
        worst[0] = max(worst[0], err)

    round_trip = [0.0]

    @settings(max_examples=300, deadline=None, database=None)
    @given(st.tuples(*(st.floats(-1e3, 1e3) for _ in range(3))),
           st.tuples(*(st.floats(-50, 50) for _ in range(3))))
    def position(p, bs):
        d3d, _, az, el = geometry_to(bs, p)
        if d3d < 1e-6:
            return
        back = position_estimate(d3d, Direction(az, el), bs)
        round_trip[0] = max(round_trip[0], float(np.max(np.abs(back - np.asarray(p)))))

    static_zero()
    range_error()
    position()
    dt = time.perf_counter() - t0
    _verdict(report, 1, [
        ("static_clutter_zeroed", not bad, "200 property cases, exact zeros"),
        ("range_error_le_half_bin", worst[0] <= half_bin + 1e-9,
         f"worst {worst[0]:.4f} m vs {half_bin:.4f} m"),
        ("position_round_trip", round_trip[0] <= 1e-9, f"max {round_trip[0]:.2e} m"),
        ("runtime_lt_60s", dt < 60, f"{dt:.1f} s"),
    ])


# --- 2. Oracle equivalence -------------------------------------------------------

def test_criterion_2_oracle_equivalence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    prs = PrsConfig(n_rb=4)
    grid = build_prs_grid(prs, 1)
    geo = ArrayGeometry(4, 4, 0.5, 0.3, -0.2)  # N = 16
    worst = 0.0
    for _ in range(100):
        n_paths = int(rng.integers(1, 6))
        paths = tuple(PathComponent(float(rng.uniform(0, 2e-6)),
                                    Direction(rng.uniform(-math.pi, math.pi), rng.uniform(-1.5, 1.5)),
                                    complex(rng.normal(), rng.normal()),
                                    doppler_hz=float(rng.uniform(-3e3, 3e3)) if i == 0 else 0.0,
                                    is_clutter=i > 0)
                      for i in range(n_paths))
        ch = ChannelRealization(paths)
        w = rng.normal(size=16) + 1j * rng.normal(size=16)
        f = rng.normal(size=16) + 1j * rng.normal(size=16)
        l = int(rng.integers(prs.l_prs))
        k = int(rng.choice(grid.active_subcarriers(l)))
        t = float(rng.uniform(0, 1e-3))
        y = evaluate(ch, grid, w, f, k, l, geo, prs, t)
        ref = observation_oracle(paths, geo, w, f, grid.values[k, l], k, prs.scs_hz, t)
        worst = max(worst, abs(y - ref) / abs(ref))
    gold_ok = all(list(gold_sequence(c, 10_000)) == gold_oracle(c, 10_000) for c in (1, 0x2AAAAAA, 2 ** 31 - 1))
    dt = time.perf_counter() - t0
    _verdict(report, 2, [
        ("observation_vs_NxN", worst <= 1e-10, f"worst rel err {worst:.2e} over 100 path sets"),
        ("gold_vs_lfsr", gold_ok, "3 c_init values x 1e4 bits"),
        ("runtime_lt_60s", dt < 60, f"{dt:.1f} s"),
    ])


def evaluate(ch, grid, w, f, k, l, geo, prs, t):
    from nrradar.channel import evaluate_observation
    return evaluate_observation(ch, grid, w, f, k, l, 0.0, geometry=geo, scs_hz=prs.scs_hz, time_s=t)


# --- 3. Noiseless end-to-end bound -----------------------------------------------

def test_criterion_3_noiseless_end_to_end(report):
    t0 = time.perf_counter()
    cfg = RunConfig(scenario=Scenario(UMA))
    cb = build_codebook(cfg.array, cfg.codebook)
    bs = np.asarray(cfg.bs_position)
    r_true = 150.0
    bin_w = range_bin_width(cfg.prs.n_active, cfg.prs.comb_k * cfg.prs.scs_hz)
    half_step = math.radians(max(cfg.codebook.az_step_deg, cfg.codebook.el_step_deg)) / 2
    bound = bin_w / 2 + r_true * half_step
    checks = []
    for beam in (len(cb) // 3 + 7, 2 * len(cb) // 3 + 20):
        d = cb.direction(beam)
        u = np.array([math.cos(d.azimuth_rad) * math.cos(d.elevation_rad),
                      math.sin(d.azimuth_rad) * math.cos(d.elevation_rad), math.sin(d.elevation_rad)])
        p_true = bs + r_true * u
        ch = ChannelRealization((PathComponent(2 * r_true / SPEED_OF_LIGHT, d, 1e-6 + 0j,
                                               doppler_hz=1000.0),), los_flag=True)
        res = process_drop(ch, cfg.prs, cb, cfg.eta_db, 0.0, None, cfg.chain_options)
        err = float(np.linalg.norm(res.position_m - p_true)) if res.detected else math.inf
        checks.append((f"beam{beam}", res.detected and err <= bound,
                       f"detected={res.detected} err={err:.3f} m bound={bound:.3f} m"))
    dt = time.perf_counter() - t0
    checks.append(("runtime_lt_60s", dt < 60, f"{dt:.1f} s"))
    _verdict(report, 3, checks)


# --- desk-scale campaigns shared by 4 to 6 ---------------------------------------

@pytest.fixture(scope="module")
def scenario_runs():
    out = {}
    for kind in (UMI, UMA):
        cfg = RunConfig(scenario=Scenario(kind), uav_heights_m=HEIGHTS,
                        drops_per_config=DESK_DROPS, chain=STAT)
        out[kind] = (cfg, run_campaign(cfg))
    return out


@pytest.mark.slow
def test_criterion_4_roc_sanity(report):
    t0 = time.perf_counter()
    grid = np.round(np.arange(0.0, 10.01, 0.2), 10)
    checks = []
    for kind in (UMI, UMA):
        cfg = RunConfig(scenario=Scenario(kind), uav_heights_m=(50.0,), drops_per_config=DESK_DROPS,
                        chain=STAT, master_seed=4)
        with_t = run_campaign(cfg)
        without = run_campaign(replace(cfg, with_target=False))
        rows = roc_sweep(with_t, without, grid)
        pfa = [r[1] for r in rows]
        pd = [r[2] for r in rows]
        mono = all(a >= b for a, b in zip(pfa, pfa[1:])) and all(a >= b for a, b in zip(pd, pd[1:]))
        (_, pfa_op, pd_op), = roc_sweep(with_t, without, [3.4])
        checks.append((f"{kind}_monotone", mono, "P_fa and P_d non-increasing over 51 thresholds"))
        checks.append((f"{kind}_margin", pd_op - pfa_op >= 0.3,
                       f"eta=3.4 dB P_d={pd_op:.3f} P_fa={pfa_op:.3f}"))
    dt = time.perf_counter() - t0
    checks.append(("runtime", True, f"{dt:.0f} s"))
    _verdict(report, 4, checks)


def _pmd(runs, kind):
    s = aggregate(runs[kind][1])
    return {g.h_uav_m: g for g in s.groups}


@pytest.mark.slow
def test_criterion_5_scenario_trends(report, scenario_runs):
    umi, uma = _pmd(scenario_runs, UMI), _pmd(scenario_runs, UMA)
    p = {h: umi[h].p_md for h in HEIGHTS}
    q = {h: uma[h].p_md for h in HEIGHTS}
    n = DESK_DROPS
    se = math.sqrt(p[25.0] * (1 - p[25.0]) / n + p[50.0] * (1 - p[50.0]) / n)
    fmt = lambda d: ", ".join(f"{int(h)}m={v:.3f}" for h, v in d.items())
    _verdict(report, 5, [
        ("UMi_25_materially_gt_50", p[25.0] - p[50.0] > 2 * se,
         f"{p[25.0]:.3f} vs {p[50.0]:.3f}, 2 s.e. = {2 * se:.3f}"),
        ("UMi_50_gt_100_200", p[50.0] > max(p[100.0], p[200.0]), fmt(p)),
        ("UMi_25_in_5_30pct", 0.05 <= p[25.0] <= 0.30, f"{p[25.0]:.3f}"),
        ("UMa_25_50_le_2pct", q[25.0] <= 0.02 and q[50.0] <= 0.02, fmt(q)),
        ("UMa_200_small", q[200.0] <= 0.05, f"{q[200.0]:.3f}"),
    ])


def _cdf_gap(better, worse):
    """sup_x (F_worse(x) - F_better(x)); <= 0 means ``better`` stochastically dominates."""
    xs = np.union1d(better, worse)
    fb = np.searchsorted(np.sort(better), xs, side="right") / len(better)
    fw = np.searchsorted(np.sort(worse), xs, side="right") / len(worse)
    return float(np.max(fw - fb))


@pytest.mark.slow
def test_criterion_6_position_error_trends(report, scenario_runs):
    umi, uma = _pmd(scenario_runs, UMI), _pmd(scenario_runs, UMA)
    checks = []
    for kind, g, cap in ((UMI, umi, 6.0), (UMA, uma, 12.0)):
        med = [g[h].error_quantiles_m["p50"] for h in HEIGHTS]
        checks.append((f"{kind}_median_increasing", all(a < b for a, b in zip(med, med[1:])),
                       ", ".join(f"{m:.2f}" for m in med)))
        p99 = [g[h].error_quantiles_m["p99"] for h in HEIGHTS]
        checks.append((f"{kind}_p99_le_{cap:g}m", max(p99) <= cap, ", ".join(f"{v:.2f}" for v in p99)))
    for h in HEIGHTS:
        a, b = np.array(umi[h].error_cdf), np.array(uma[h].error_cdf)
        # one-sided two-sample KS allowance at 5 %: sampling noise alone can produce this gap
        tol = 1.36 * math.sqrt((len(a) + len(b)) / (len(a) * len(b)))
        gap = _cdf_gap(a, b)
        checks.append((f"UMi_dominates_UMa_{int(h)}m", gap <= tol, f"gap {gap:.3f} tol {tol:.3f}"))
    _verdict(report, 6, checks)


# --- 7. full campaign (optional) -------------------------------------------------

@pytest.mark.slow
def test_criterion_7_full_campaign(report, tmp_path):
    if not os.environ.get("NRRADAR_FULL_CAMPAIGN"):
        report(7, None, "optional 4000-drop campaign not requested (set NRRADAR_FULL_CAMPAIGN=1)")
        pytest.skip("full-scale campaign is optional")
    workers = os.cpu_count() or 1
    total = 0
    t0 = time.perf_counter()
    for kind in (UMI, UMA):
        for present in (True, False):
            cfg = RunConfig(scenario=Scenario(kind), with_target=present, workers=workers)
            recs = run_campaign(cfg)
            write_records(tmp_path / f"{kind}_{present}.csv", recs, "full")
            total += len(recs)
    dt = time.perf_counter() - t0
    _verdict(report, 7, [("records_64000", total == 64000, f"{total} records in {dt / 60:.1f} min")])


# --- 8. determinism --------------------------------------------------------------

@pytest.mark.slow
def test_criterion_8_determinism(report, scenario_runs, tmp_path):
    import json

    cfg = {"scenario": {"kind": "UMa-AV"}, "uav_heights_m": [25, 200], "drops_per_config": 40,
           "chain": {"sweep_mode": "statistic"}}
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps(cfg))
    codes = [main(["run", str(conf), "--out", str(tmp_path / d), "--seed", "0"]) for d in ("a", "b")]
    a = (tmp_path / "a" / "records.csv").read_bytes()
    b = (tmp_path / "b" / "records.csv").read_bytes()
    # the same drops inside the larger criterion 5 campaign must match field for field
    full = scenario_runs[UMA][1]
    sub = [r for r in full if r.drop_id % DESK_DROPS < 40 and r.h_uav_m in (25.0, 200.0)]
    rerun = run_campaign(RunConfig(scenario=Scenario(UMA), uav_heights_m=(25.0, 200.0),
                                   drops_per_config=40, chain=STAT))
    same_drops = [(x.h_uav_m, x.true_position_m, x.par_db, x.detected) for x in sub] == \
                 [(x.h_uav_m, x.true_position_m, x.par_db, x.detected) for x in rerun]
    _verdict(report, 8, [
        ("cli_exit_codes", codes == [0, 0], str(codes)),
        ("records_csv_byte_identical", a == b, f"{len(a)} bytes"),
        ("drop_streams_keyed_by_id", same_drops, "40-drop rerun matches the 500-drop campaign prefix"),
    ])
