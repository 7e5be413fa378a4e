"""Monte Carlo campaigns: target drops, link budget, chain execution and statistics."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .antenna import ArrayGeometry, Codebook, dft_codebook
from .chain import ChainOptions, process_drop
from .channel import SCENARIOS, ClutterParams, Scenario, TargetState, build_channel, geometry_to
from .constants import THERMAL_NOISE_DBM_HZ
from .prs import PrsConfig

log = logging.getLogger(__name__)

CELL_SHAPES = ("sector", "disc", "hexagon")


@dataclass(frozen=True)
class CodebookSpec:
    n_az: int = 41
    n_el: int = 46
    az_span_deg: tuple[float, float] = (-60.0, 60.0)
    el_span_deg: tuple[float, float] = (0.0, 90.0)

    @property
    def az_step_deg(self) -> float:
        return 0.0 if self.n_az == 1 else (self.az_span_deg[1] - self.az_span_deg[0]) / (self.n_az - 1)

    @property
    def el_step_deg(self) -> float:
        return 0.0 if self.n_el == 1 else (self.el_span_deg[1] - self.el_span_deg[0]) / (self.n_el - 1)


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario = field(default_factory=Scenario)
    uav_heights_m: tuple[float, ...] = (25.0, 50.0, 100.0, 200.0)
    drops_per_config: int = 4000
    with_target: bool = True
    prs: PrsConfig = field(default_factory=PrsConfig)
    array: ArrayGeometry = field(default_factory=lambda: ArrayGeometry(tilt_rad=math.radians(45.0)))
    codebook: CodebookSpec = field(default_factory=CodebookSpec)
    clutter: ClutterParams = field(default_factory=ClutterParams)
    chain: ChainOptions = field(default_factory=ChainOptions)
    eta_db: float = 3.4
    eirp_dbm: float = 75.0
    noise_figure_db: float = 10.0
    n_rp: int = 3
    rcs_dbsm: float = -12.81
    radial_velocity_mps: float = 5.0
    cell_shape: str = "sector"
    sector_width_deg: float = 120.0
    min_distance_m: float = 10.0
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "uav_heights_m", tuple(float(h) for h in self.uav_heights_m))
        if self.drops_per_config < 1:
            raise ValueError("drops_per_config must be >= 1")
        if not self.uav_heights_m or any(h <= 0 for h in self.uav_heights_m):
            raise ValueError("uav_heights_m must be a non-empty list of positive heights")
        if self.eirp_dbm > 75.0:
            raise ValueError("eirp_dbm exceeds the 75 dBm per 100 MHz cap")
        if self.cell_shape not in CELL_SHAPES:
            raise ValueError(f"cell_shape must be one of {CELL_SHAPES}")
        if not 0 < self.sector_width_deg <= 360:
            raise ValueError("sector_width_deg must be in (0, 360]")
        if self.n_rp < 0:
            raise ValueError("n_rp must be non-negative")
        if self.min_distance_m < 0 or self.min_distance_m >= self.scenario.cell_radius_m:
            raise ValueError("min_distance_m must be in [0, ISD/2)")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.prs.carrier_hz != self.scenario.carrier_hz:
            raise ValueError("prs.carrier_hz and scenario carrier_hz disagree")

    @property
    def bs_position(self) -> tuple[float, float, float]:
        return (0.0, 0.0, float(self.scenario.bs_height_m))

    @property
    def chain_options(self) -> ChainOptions:
        return replace(self.chain, bs_position=self.bs_position)


@dataclass
class DropRecord:
    drop_id: int
    scenario: str
    h_uav_m: float
    target_present: bool
    true_position_m: tuple[float, float, float] | None
    los: bool | None
    detected: bool
    par_db: float
    beam_index: int = -1
    range_m: float | None = None
    estimated_position_m: tuple[float, float, float] | None = None
    position_error_m: float | None = None
    one_way_pl_db: float | None = None
    shadow_fading_db: float | None = None
    pl_branch: str = ""
    status: str = "ok"


@dataclass
class GroupStats:
    scenario: str
    h_uav_m: float
    n_target: int
    n_detected: int
    n_absent: int
    n_false_alarm: int
    n_failed: int
    p_md: float | None
    p_fa: float | None
    error_mean_m: float | None
    error_quantiles_m: dict
    error_cdf: list  # sorted position errors of detected, target-present drops


@dataclass
class MetricsSummary:
    groups: list[GroupStats]
    roc: list[tuple[float, float, float]] = field(default_factory=list)

    def group(self, scenario: str, h_uav_m: float) -> GroupStats:
        for g in self.groups:
            if g.scenario == scenario and g.h_uav_m == h_uav_m:
                return g
        raise KeyError((scenario, h_uav_m))


# --- drops -------------------------------------------------------------------

def drop_target(scenario: Scenario, h_uav: float, rng: np.random.Generator, *,
                cell_shape: str = "sector", sector_width_deg: float = 120.0,
                min_distance_m: float = 10.0, radial_velocity_mps: float = 5.0,
                rcs_dbsm: float = -12.81, boresight_az_rad: float = 0.0) -> TargetState:
    """Uniform horizontal drop inside the cell around the BS at height ``h_uav``."""
    if h_uav <= 0:
        raise ValueError("h_uav must be positive")
    r_max = scenario.cell_radius_m
    if cell_shape == "hexagon":
        # regular hexagon with inradius ISD/2, flat sides facing +-y
        circ = r_max / math.cos(math.pi / 6)
        while True:
            x, y = rng.uniform(-circ, circ, 2)
            ax, ay = abs(x), abs(y)
            inside = ay <= r_max and ax * math.sin(math.pi / 3) + ay * 0.5 <= r_max
            if inside and math.hypot(x, y) >= min_distance_m:
                break
    else:
        r = math.sqrt(rng.uniform(min_distance_m ** 2, r_max ** 2))
        if cell_shape == "sector":
            half = math.radians(sector_width_deg) / 2
            psi = boresight_az_rad + rng.uniform(-half, half)
        else:
            psi = rng.uniform(-math.pi, math.pi)
        x, y = r * math.cos(psi), r * math.sin(psi)
    return TargetState((x, y, h_uav), radial_velocity_mps, rcs_dbsm)


def link_budget(config: RunConfig) -> tuple[float, float]:
    """Transmit power (dBm) and the noise std of the normalized observation model.

    Observations are scaled so a unit path gain seen through aligned unit-norm
    beams and a unit-power PRS symbol corresponds to the per-subcarrier
    transmit power times the two-way array gain N^2. The noise std is the
    matching thermal + noise-figure level in those units.
    """
    n = config.array.n_elements
    tx_dbm = config.eirp_dbm - 10 * math.log10(n)
    prs = config.prs
    bw = prs.comb_k * prs.scs_hz * prs.n_active
    noise_dbm = THERMAL_NOISE_DBM_HZ + 10 * math.log10(bw) + config.noise_figure_db
    noise_std = math.sqrt(10 ** ((noise_dbm - tx_dbm) / 10)) / n
    return tx_dbm, noise_std


@lru_cache(maxsize=4)
def build_codebook(geometry: ArrayGeometry, spec: CodebookSpec) -> Codebook:
    return dft_codebook(geometry, spec.n_az, spec.n_el,
                        tuple(math.radians(a) for a in spec.az_span_deg),
                        tuple(math.radians(e) for e in spec.el_span_deg))


def drop_rng(master_seed: int, scenario: str, h_uav: float, with_target: bool, index: int):
    key = [master_seed, SCENARIOS.index(scenario), int(round(h_uav * 100)), int(with_target), index]
    return np.random.default_rng(np.random.SeedSequence(key))


def run_drop(config: RunConfig, h_uav: float, index: int, drop_id: int) -> DropRecord:
    sc = config.scenario
    rng = drop_rng(config.master_seed, sc.kind, h_uav, config.with_target, index)
    rec = DropRecord(drop_id, sc.kind, h_uav, config.with_target, None, None, False, float("nan"))
    try:
        target = None
        if config.with_target:
            target = drop_target(sc, h_uav, rng, cell_shape=config.cell_shape,
                                 sector_width_deg=config.sector_width_deg,
                                 min_distance_m=config.min_distance_m,
                                 radial_velocity_mps=config.radial_velocity_mps,
                                 rcs_dbsm=config.rcs_dbsm,
                                 boresight_az_rad=config.array.boresight_az_rad)
            rec.true_position_m = target.position_m
        ch = build_channel(sc, target, config.bs_position, config.n_rp, rng, config.clutter)
        if target is not None:
            rec.los = ch.los_flag
            rec.one_way_pl_db = ch.one_way_pl_db
            rec.shadow_fading_db = ch.shadow_fading_db
            rec.pl_branch = ch.pl_branch
        _, noise_std = link_budget(config)
        cb = build_codebook(config.array, config.codebook)
        res = process_drop(ch, config.prs, cb, config.eta_db, noise_std, rng, config.chain_options)
    except Exception as exc:  # noqa: BLE001  recorded per drop, not fatal
        log.warning("drop %d failed: %s", drop_id, exc)
        rec.status = f"error: {exc}"
        return rec
    rec.detected = res.detected
    rec.par_db = res.par_db
    rec.beam_index = res.beam_index
    if res.detected:
        rec.range_m = res.range_m
        rec.estimated_position_m = tuple(float(v) for v in res.position_m)
        if target is not None:
            rec.position_error_m = float(np.linalg.norm(res.position_m - np.asarray(target.position_m)))
    return rec


def _run_chunk(args):
    config, items = args
    return [run_drop(config, h, i, d) for h, i, d in items]


def run_campaign(config: RunConfig, progress=None) -> list[DropRecord]:
    """Run every (height, drop) of ``config``; records come back sorted by drop_id.

    Each drop draws from its own seed keyed by (master_seed, scenario, height,
    presence, index), so results do not depend on scheduling.
    """
    items = [(h, i, hi * config.drops_per_config + i)
             for hi, h in enumerate(config.uav_heights_m)
             for i in range(config.drops_per_config)]
    if config.workers == 1:
        out = []
        for n, (h, i, d) in enumerate(items):
            out.append(run_drop(config, h, i, d))
            if progress:
                progress(n + 1, len(items))
        return out
    size = max(1, len(items) // (config.workers * 8))
    chunks = [(config, items[k:k + size]) for k in range(0, len(items), size)]
    out = []
    with ProcessPoolExecutor(config.workers) as ex:
        for part in ex.map(_run_chunk, chunks):
            out.extend(part)
            if progress:
                progress(len(out), len(items))
    return sorted(out, key=lambda r: r.drop_id)


# --- statistics ----------------------------------------------------------------

def roc_sweep(records_with, records_without, eta_grid) -> list[tuple[float, float, float]]:
    """(eta_db, P_fa, P_d) for each threshold, from the raw PAR values."""
    par_t = np.array([r.par_db for r in records_with if r.status == "ok"])
    par_n = np.array([r.par_db for r in records_without if r.status == "ok"])
    if par_t.size == 0 or par_n.size == 0:
        raise ValueError("roc_sweep needs target-present and target-absent records")
    return [(float(eta), float(np.mean(par_n > eta)), float(np.mean(par_t > eta)))
            for eta in eta_grid]


def _quantiles(errors: np.ndarray) -> dict:
    if errors.size == 0:
        return {"p50": None, "p90": None, "p99": None}
    q = np.quantile(errors, [0.5, 0.9, 0.99])
    return {"p50": float(q[0]), "p90": float(q[1]), "p99": float(q[2])}


def aggregate(records) -> MetricsSummary:
    if not records:
        raise ValueError("aggregate needs at least one record")
    keys = sorted({(r.scenario, r.h_uav_m) for r in records}, key=lambda k: (SCENARIOS.index(k[0]), k[1]))
    groups = []
    for sc, h in keys:
        rs = [r for r in records if r.scenario == sc and r.h_uav_m == h]
        ok = [r for r in rs if r.status == "ok"]
        tgt = [r for r in ok if r.target_present]
        absent = [r for r in ok if not r.target_present]
        det = [r for r in tgt if r.detected]
        errs = np.sort([r.position_error_m for r in det if r.position_error_m is not None])
        groups.append(GroupStats(
            scenario=sc, h_uav_m=h,
            n_target=len(tgt), n_detected=len(det),
            n_absent=len(absent), n_false_alarm=sum(r.detected for r in absent),
            n_failed=len(rs) - len(ok),
            p_md=(1 - len(det) / len(tgt)) if tgt else None,
            p_fa=(sum(r.detected for r in absent) / len(absent)) if absent else None,
            error_mean_m=float(errs.mean()) if errs.size else None,
            error_quantiles_m=_quantiles(errs),
            error_cdf=[float(e) for e in errs],
        ))
    return MetricsSummary(groups)
