"""Monostatic ISAC channel: UAV echo plus static clutter from virtual reference points.

Path-loss and LoS-probability formulas follow the aerial-UE models of
3GPP TR 36.777 (Tables B-1/B-2) above 22.5 m and the TR 38.901 ground-UE
models at or below 22.5 m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .antenna import ArrayGeometry, Direction, beamformed_gain, steering_vector
from .constants import SPEED_OF_LIGHT

UMI = "UMi-AV"
UMA = "UMa-AV"
SCENARIOS = (UMI, UMA)

AERIAL_MIN_HEIGHT_M = 22.5

_TABLE_DEFAULTS = {UMI: (10.0, 200.0), UMA: (25.0, 500.0)}
# median RMS delay spread of the clutter clusters
_CLUTTER_DS_S = {UMI: 100e-9, UMA: 300e-9}


@dataclass(frozen=True)
class Scenario:
    kind: str = UMI
    bs_height_m: float | None = None
    isd_m: float | None = None
    carrier_hz: float = 30e9

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.kind!r}; expected one of {SCENARIOS}")
        h, isd = _TABLE_DEFAULTS[self.kind]
        if self.bs_height_m is None:
            object.__setattr__(self, "bs_height_m", h)
        if self.isd_m is None:
            object.__setattr__(self, "isd_m", isd)
        if self.bs_height_m <= 0 or self.isd_m <= 0 or self.carrier_hz <= 0:
            raise ValueError("bs_height_m, isd_m and carrier_hz must be positive")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def cell_radius_m(self) -> float:
        return self.isd_m / 2


@dataclass(frozen=True)
class TargetState:
    position_m: tuple[float, float, float]
    radial_velocity_mps: float = 5.0
    rcs_dbsm: float = -12.81

    def __post_init__(self):
        pos = tuple(float(x) for x in self.position_m)
        if len(pos) != 3:
            raise ValueError("position_m must have three coordinates")
        if pos[2] < 0:
            raise ValueError("target height must be non-negative")
        object.__setattr__(self, "position_m", pos)


@dataclass(frozen=True)
class PathComponent:
    delay_s: float
    direction: Direction
    gain: complex
    doppler_hz: float = 0.0
    is_clutter: bool = False

    def __post_init__(self):
        if self.delay_s < 0:
            raise ValueError("delay must be non-negative")
        if self.is_clutter and self.doppler_hz != 0:
            raise ValueError("clutter components are static")


@dataclass(frozen=True)
class ChannelRealization:
    paths: tuple[PathComponent, ...]
    los_flag: bool = False
    one_way_pl_db: float = float("nan")
    shadow_fading_db: float = 0.0
    pl_branch: str = ""

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if sum(not p.is_clutter for p in self.paths) > 1:
            raise ValueError("single-target scope: at most one target component")

    @property
    def round_trip_pl_db(self) -> float:
        return 2 * (self.one_way_pl_db + self.shadow_fading_db)

    @property
    def target(self) -> PathComponent | None:
        for p in self.paths:
            if not p.is_clutter:
                return p
        return None

    @property
    def clutter(self) -> tuple[PathComponent, ...]:
        return tuple(p for p in self.paths if p.is_clutter)


@dataclass(frozen=True)
class ClutterParams:
    subpaths: int = 8
    angle_spread_deg: float = 10.0
    ds_median_s: float | None = None
    ds_log10_std: float = 0.3
    min_distance_m: float = 10.0


def _check_nonneg(**kw):
    for k, v in kw.items():
        if v < 0:
            raise ValueError(f"{k} must be non-negative, got {v}")


def los_probability(scenario: Scenario, h_ut_m: float, d2d_m: float) -> float:
    _check_nonneg(h_ut_m=h_ut_m, d2d_m=d2d_m)
    h, d = float(h_ut_m), float(d2d_m)
    if scenario.kind == UMA and h > 100:
        return 1.0
    if h > AERIAL_MIN_HEIGHT_M:
        if scenario.kind == UMA:
            d1 = max(460 * np.log10(h) - 700, 18.0)
            p1 = 4300 * np.log10(h) - 3800
        else:
            d1 = max(294.05 * np.log10(h) - 432.94, 18.0)
            p1 = 233.98 * np.log10(h) - 0.95
        if d <= d1:
            return 1.0
        p = d1 / d + np.exp(-d / p1) * (1 - d1 / d)
        return float(np.clip(p, 0.0, 1.0))
    # TR 38.901 ground-UE models
    if d <= 18:
        return 1.0
    if scenario.kind == UMI:
        p = 18 / d + np.exp(-d / 36) * (1 - 18 / d)
    else:
        c = 0.0 if h <= 13 else ((h - 13) / 10) ** 1.5
        p = (18 / d + np.exp(-d / 63) * (1 - 18 / d)) * (1 + c * 1.25 * (d / 100) ** 3 * np.exp(-d / 150))
    return float(np.clip(p, 0.0, 1.0))


def path_loss_branch(h_ut_m: float) -> str:
    return "TR36.777-aerial" if h_ut_m > AERIAL_MIN_HEIGHT_M else "TR38.901-ground"


def _ground_pl(scenario: Scenario, los: bool, d3d: float, h_ut: float) -> float:
    fc = scenario.carrier_hz / 1e9
    h_bs = scenario.bs_height_m
    h_ut = float(np.clip(h_ut, 1.5, AERIAL_MIN_HEIGHT_M))
    d2d = np.sqrt(max(d3d ** 2 - (h_bs - h_ut) ** 2, 1e-6))
    d_bp = 4 * max(h_bs - 1, 0.1) * max(h_ut - 1, 0.1) * scenario.carrier_hz / SPEED_OF_LIGHT
    if scenario.kind == UMA:
        if d2d <= d_bp:
            pl_los = 28.0 + 22 * np.log10(d3d) + 20 * np.log10(fc)
        else:
            pl_los = (28.0 + 40 * np.log10(d3d) + 20 * np.log10(fc)
                      - 9 * np.log10(d_bp ** 2 + (h_bs - h_ut) ** 2))
        if los:
            return float(pl_los)
        pl_n = 13.54 + 39.08 * np.log10(d3d) + 20 * np.log10(fc) - 0.6 * (h_ut - 1.5)
        return float(max(pl_los, pl_n))
    if d2d <= d_bp:
        pl_los = 32.4 + 21 * np.log10(d3d) + 20 * np.log10(fc)
    else:
        pl_los = (32.4 + 40 * np.log10(d3d) + 20 * np.log10(fc)
                  - 9.5 * np.log10(d_bp ** 2 + (h_bs - h_ut) ** 2))
    if los:
        return float(pl_los)
    pl_n = 35.3 * np.log10(d3d) + 22.4 + 21.3 * np.log10(fc) - 0.3 * (h_ut - 1.5)
    return float(max(pl_los, pl_n))


def path_loss_db(scenario: Scenario, los: bool, d3d_m: float, h_ut_m: float) -> float:
    """One-way path loss in dB."""
    if d3d_m <= 0:
        raise ValueError("d3d_m must be positive")
    _check_nonneg(h_ut_m=h_ut_m)
    if h_ut_m <= AERIAL_MIN_HEIGHT_M:
        return _ground_pl(scenario, los, d3d_m, h_ut_m)
    fc = scenario.carrier_hz / 1e9
    lh = np.log10(h_ut_m)
    ld = np.log10(d3d_m)
    if scenario.kind == UMA:
        if los:
            return float(28.0 + 22 * ld + 20 * np.log10(fc))
        return float(-17.5 + (46 - 7 * lh) * ld + 20 * np.log10(40 * np.pi * fc / 3))
    pl_los = 30.9 + (22.25 - 0.5 * lh) * ld + 20 * np.log10(fc)
    if los:
        return float(pl_los)
    return float(max(pl_los, 32.4 + (43.2 - 7.6 * lh) * ld + 20 * np.log10(fc)))


def shadow_fading_std_db(scenario: Scenario, los: bool, h_uav_m: float) -> float:
    if los:
        if scenario.kind == UMI:
            return float(max(5 * np.exp(-0.01 * h_uav_m), 2.0))
        return float(4.64 * np.exp(-0.0066 * h_uav_m))
    return 8.0 if scenario.kind == UMI else 6.0


def target_amplitude(round_trip_pl_db: float, rcs_dbsm: float, wavelength_m: float) -> float:
    if wavelength_m <= 0:
        raise ValueError("wavelength must be positive")
    sigma = 10 ** (rcs_dbsm / 10)
    return float(10 ** (-round_trip_pl_db / 20) * np.sqrt(4 * np.pi * sigma / wavelength_m ** 2))


def st_slow_time_gain(a_q, doppler_hz, slow_time_index, slow_time_step_s):
    return a_q * np.exp(2j * np.pi * doppler_hz * np.asarray(slow_time_index) * slow_time_step_s)


def doppler_hz(radial_velocity_mps: float, wavelength_m: float) -> float:
    """Two-way Doppler shift of a monostatic echo."""
    return 2 * radial_velocity_mps / wavelength_m


def geometry_to(bs_position, point) -> tuple[float, float, float, float]:
    """(d3d, d2d, azimuth, elevation) of ``point`` seen from ``bs_position``."""
    v = np.asarray(point, dtype=float) - np.asarray(bs_position, dtype=float)
    d2d = float(np.hypot(v[0], v[1]))
    d3d = float(np.linalg.norm(v))
    return d3d, d2d, float(np.arctan2(v[1], v[0])), float(np.arctan2(v[2], d2d))


def generate_clutter(scenario: Scenario, n_rp: int, rng: np.random.Generator,
                     params: ClutterParams | None = None) -> list[PathComponent]:
    """Clutter clusters from ``n_rp`` randomly dropped reference points.

    Each RP gets an NLoS round-trip budget split over sub-paths with an
    exponential power-delay profile and Laplacian angular spread.
    """
    if n_rp < 0:
        raise ValueError("n_rp must be non-negative")
    params = params or ClutterParams()
    if n_rp == 0:
        return []
    ds_median = params.ds_median_s or _CLUTTER_DS_S[scenario.kind]
    b = np.deg2rad(params.angle_spread_deg) / np.sqrt(2)
    h_bs = scenario.bs_height_m
    paths = []
    for _ in range(n_rp):
        d2d = rng.uniform(params.min_distance_m, scenario.cell_radius_m)
        psi = rng.uniform(-np.pi, np.pi)
        h_rp = rng.uniform(0.0, h_bs)
        d3d = float(np.hypot(d2d, h_rp - h_bs))
        el0 = np.arctan2(h_rp - h_bs, d2d)
        sf = rng.normal(0.0, shadow_fading_std_db(scenario, False, h_rp))
        pl_rt = 2 * (path_loss_db(scenario, False, d3d, h_rp) + sf)
        ds = ds_median * 10 ** (params.ds_log10_std * rng.standard_normal())
        excess = np.sort(rng.exponential(ds, params.subpaths))
        excess -= excess[0]
        power = np.exp(-excess / ds)
        power /= power.sum()
        phases = rng.uniform(0, 2 * np.pi, params.subpaths)
        az = psi + rng.laplace(0.0, b, params.subpaths)
        el = np.clip(el0 + rng.laplace(0.0, b, params.subpaths), -np.pi / 2, np.pi / 2)
        amp = np.sqrt(power * 10 ** (-pl_rt / 10) / n_rp)
        tau0 = 2 * d3d / SPEED_OF_LIGHT
        for n in range(params.subpaths):
            paths.append(PathComponent(
                delay_s=float(tau0 + excess[n]),
                direction=Direction(float(az[n]), float(el[n])),
                gain=complex(amp[n] * np.exp(1j * phases[n])),
                is_clutter=True,
            ))
    return paths


def build_channel(scenario: Scenario, target: TargetState | None, bs_position,
                  n_rp: int, rng: np.random.Generator,
                  clutter: ClutterParams | None = None) -> ChannelRealization:
    """Draw one channel realization; ``target=None`` gives clutter only."""
    paths = []
    los = False
    pl = float("nan")
    sf = 0.0
    branch = ""
    if target is not None:
        d3d, d2d, az, el = geometry_to(bs_position, target.position_m)
        if d3d <= 0:
            raise ValueError("target coincides with the BS")
        h = target.position_m[2]
        los = bool(rng.random() < los_probability(scenario, h, d2d))
        pl = path_loss_db(scenario, los, d3d, h)
        sf = float(rng.normal(0.0, shadow_fading_std_db(scenario, los, h)))
        branch = path_loss_branch(h)
        a_q = target_amplitude(2 * (pl + sf), target.rcs_dbsm, scenario.wavelength_m)
        paths.append(PathComponent(
            delay_s=2 * d3d / SPEED_OF_LIGHT,
            direction=Direction(az, el),
            gain=complex(a_q),
            doppler_hz=doppler_hz(target.radial_velocity_mps, scenario.wavelength_m),
        ))
    paths.extend(generate_clutter(scenario, n_rp, rng, clutter))
    return ChannelRealization(tuple(paths), los, pl, sf, branch)


def evaluate_observation(realization: ChannelRealization, grid, w, f, k: int, l: int,
                         noise_std: float, *, geometry: ArrayGeometry, scs_hz: float,
                         time_s: float = 0.0, rng: np.random.Generator | None = None) -> complex:
    """Received sample y_{k,l} = w^H H_{k,l} f s_{k,l} + n at subcarrier k, symbol l.

    The N x N channel matrix is never formed: each path contributes
    gain * (w^H a)(a^H f) * exp(-j 2 pi k df tau). ``time_s`` sets the
    slow-time instant for the Doppler phase of moving components.
    """
    if not grid.active_mask[k, l]:
        raise ValueError(f"subcarrier {k} is not active in symbol {l}")
    y = 0j
    for p in realization.paths:
        a = steering_vector(geometry, p.direction)
        g = p.gain * np.exp(2j * np.pi * p.doppler_hz * time_s)
        y += g * beamformed_gain(w, a, a, f) * np.exp(-2j * np.pi * k * scs_hz * p.delay_s)
    y *= grid.values[k, l]
    if noise_std > 0:
        if rng is None:
            raise ValueError("a random generator is required when noise_std > 0")
        y += noise_std * (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2)
    return complex(y)
