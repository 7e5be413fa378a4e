"""Receive-side processing: clutter suppression, beam sweep, matched filter,
range profile, PAR detection and 3D position reconstruction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .antenna import Codebook, Direction, unit_vector
from .channel import ChannelRealization
from .constants import SPEED_OF_LIGHT
from .prs import PrsConfig, prs_tone_block

SWEEP_MODES = ("explicit", "statistic")
PROFILE_MODES = ("averaged", "single")


@dataclass
class BeamObservation:
    beam_index: int
    samples: np.ndarray  # (active tone, slow-time symbol)

    def __post_init__(self):
        if self.samples.ndim != 2 or self.samples.shape[1] < 2:
            raise ValueError("a beam observation needs at least two slow-time symbols")


@dataclass
class RangeProfile:
    bins: np.ndarray  # (n_r, n_symbols) complex r_l(d)
    bin_width_m: float

    @property
    def n_r(self) -> int:
        return self.bins.shape[0]

    @property
    def averaged(self) -> np.ndarray:
        """Noncoherent slow-time average mean_l |r_l(d)|."""
        return np.abs(self.bins).mean(axis=1)


@dataclass
class DetectionResult:
    detected: bool
    par_db: float
    peak_bin: int
    range_m: float | None = None
    direction: Direction | None = None
    position_m: np.ndarray | None = None
    beam_index: int = -1
    sweep_degenerate: bool = False


@dataclass
class SweepResult:
    best_index: int
    direction: Direction
    power: np.ndarray
    degenerate: bool


@dataclass(frozen=True)
class ChainOptions:
    sweep_repetitions: int = 4
    sweep_mode: str = "explicit"
    zero_pad: int = 1
    profile: str = "averaged"
    bs_position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    chunk_beams: int = 64

    def __post_init__(self):
        if self.sweep_repetitions < 2:
            raise ValueError("sweep_repetitions must be >= 2 for clutter suppression")
        if self.sweep_mode not in SWEEP_MODES:
            raise ValueError(f"sweep_mode must be one of {SWEEP_MODES}")
        if self.profile not in PROFILE_MODES:
            raise ValueError(f"profile must be one of {PROFILE_MODES}")
        if self.zero_pad < 1:
            raise ValueError("zero_pad must be >= 1")


def clutter_suppress(samples: np.ndarray, groups=None) -> np.ndarray:
    """Subtract the slow-time mean of every row.

    With ``groups`` (one label per column) the mean is taken separately over
    the columns sharing a label, e.g. symbols that occupy the same comb offset.
    """
    x = np.asarray(samples)
    if x.ndim != 2:
        raise ValueError("samples must be a (tone, symbol) matrix")
    if groups is None:
        if x.shape[1] < 2:
            raise ValueError("clutter suppression needs at least two slow-time columns")
        return _demean(x)
    groups = np.asarray(groups)
    out = np.empty(x.shape, dtype=np.result_type(x, np.complex128))
    for g in np.unique(groups):
        cols = groups == g
        if cols.sum() < 2:
            raise ValueError(f"group {g!r} has fewer than two slow-time columns")
        out[:, cols] = _demean(x[:, cols])
    return out


def _demean(x: np.ndarray) -> np.ndarray:
    # shift by the first column so constant rows cancel to exactly zero
    d = x - x[:, :1]
    return d - d.mean(axis=1, keepdims=True)


def matched_filter(y: np.ndarray, s: np.ndarray, beta: float | None = None) -> np.ndarray:
    """Per-tone channel estimate s* y / beta^2."""
    y = np.asarray(y)
    s = np.asarray(s)
    if y.shape != s.shape:
        raise ValueError(f"shape mismatch: y {y.shape} vs s {s.shape}")
    beta2 = float(np.mean(np.abs(s) ** 2)) if beta is None else beta ** 2
    return np.conj(s) * y / beta2


def range_bin_width(n_r: int, tone_spacing_hz: float) -> float:
    return SPEED_OF_LIGHT / (2 * n_r * tone_spacing_hz)


def range_profile(h_hat: np.ndarray, n_r: int, tone_spacing_hz: float = 1.0) -> RangeProfile:
    """Length-n_r IDFT across active tones, r_l(d) = (1/n_r) sum_k h_kl exp(j 2 pi k d / n_r)."""
    h_hat = np.asarray(h_hat)
    if h_hat.ndim == 1:
        h_hat = h_hat[:, None]
    if n_r < h_hat.shape[0]:
        raise ValueError(f"n_r={n_r} is shorter than the {h_hat.shape[0]} active tones")
    bins = np.fft.ifft(h_hat, n=n_r, axis=0)
    return RangeProfile(bins, range_bin_width(n_r, tone_spacing_hz))


def par_detect(profile: np.ndarray, eta_db: float) -> DetectionResult:
    """Peak-to-average ratio test on a magnitude profile; PAR in dB is 20*log10."""
    mag = np.abs(np.asarray(profile))
    if mag.size == 0:
        raise ValueError("empty range profile")
    mean = mag.mean()
    peak = int(np.argmax(mag))
    if mean <= 0:
        return DetectionResult(False, 0.0, peak)
    par_db = float(20 * np.log10(mag[peak] / mean))
    return DetectionResult(par_db > eta_db, par_db, peak)


def position_estimate(range_m: float, direction: Direction, bs_position) -> np.ndarray:
    if range_m < 0:
        raise ValueError("range must be non-negative")
    u = unit_vector(direction.azimuth_rad, direction.elevation_rad)
    return np.asarray(bs_position, dtype=float) + range_m * u


# --- simulated reception ---------------------------------------------------

def _path_arrays(channel: ChannelRealization):
    paths = channel.paths
    az = np.array([p.direction.azimuth_rad for p in paths])
    el = np.array([p.direction.elevation_rad for p in paths])
    tau = np.array([p.delay_s for p in paths])
    gain = np.array([p.gain for p in paths], dtype=np.complex128)
    fd = np.array([p.doppler_hz for p in paths])
    clut = np.array([p.is_clutter for p in paths], dtype=bool)
    return az, el, tau, gain, fd, clut


def _tone_phasors(prs: PrsConfig, tau: np.ndarray) -> np.ndarray:
    """exp(-j 2 pi k df tau) for each path, symbol offset and active tone: (P, L, M)."""
    k = (np.arange(prs.n_active)[None, :] * prs.comb_k
         + np.asarray(prs.offsets)[:, None])  # (L, M) physical subcarrier
    return np.exp(-2j * np.pi * prs.scs_hz * tau[:, None, None] * k[None])


def _symbol_times(prs: PrsConfig, occasions: np.ndarray) -> np.ndarray:
    """Absolute time of every symbol, shape occasions.shape + (L,)."""
    occ = np.asarray(occasions)[..., None]
    idx = occ * prs.symbols_per_period + prs.symbol_start + np.arange(prs.l_prs)
    return idx * prs.symbol_duration_s


def _prs_symbols(prs: PrsConfig, occasions: np.ndarray) -> np.ndarray:
    """PRS symbols on active tones, shape occasions.shape + (L, M)."""
    block = prs_tone_block(prs)
    occ = np.asarray(occasions) % prs.n_prs
    cols = occ[..., None] * prs.l_prs + np.arange(prs.l_prs)
    return np.moveaxis(block[:, cols], 0, -1)


def _complex_noise(rng: np.random.Generator, shape, std: float) -> np.ndarray:
    if std == 0:
        return np.zeros(shape, dtype=np.complex128)
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * (std / np.sqrt(2))


def beam_sweep(channel: ChannelRealization, prs: PrsConfig, codebook: Codebook,
               repetitions: int, noise_std: float, rng: np.random.Generator | None = None,
               mode: str = "explicit", start_occasion: int = 0, chunk_beams: int = 64) -> SweepResult:
    """Exhaustive sweep with w = f = beam over ``repetitions`` occasions per beam.

    Each beam's matched-filtered samples are clutter-suppressed per comb
    offset across its repetitions and the residual power is accumulated.
    ``mode="statistic"`` draws that power from its exact distribution
    instead of synthesizing every sample.
    """
    n_beams = len(codebook)
    if n_beams == 0:
        raise ValueError("empty codebook")
    if repetitions < 2:
        raise ValueError("need at least two occasions per beam")
    if mode not in SWEEP_MODES:
        raise ValueError(f"mode must be one of {SWEEP_MODES}")
    if noise_std > 0 and rng is None:
        raise ValueError("a random generator is required when noise_std > 0")
    az, el, tau, gain, fd, clut = _path_arrays(channel)
    if len(tau):
        g_bp = codebook.monostatic_gain(az, el)  # (B, P)
    else:
        g_bp = np.zeros((n_beams, 0))
    occ = start_occasion + np.arange(n_beams)[:, None] * repetitions + np.arange(repetitions)
    times = _symbol_times(prs, occ)  # (B, R, L)
    beta2 = prs.comb_k
    has_target = bool((~clut).any())
    if has_target:
        q = int(np.flatnonzero(~clut)[0])
        tq = g_bp[:, q] * gain[q]
        tt = np.exp(2j * np.pi * fd[q] * times)
    else:
        tq = np.zeros(n_beams, dtype=np.complex128)
        tt = np.ones_like(times, dtype=np.complex128)

    if mode == "statistic":
        power = _sweep_statistic(prs, tq, tt, noise_std, rng, repetitions)
    else:
        ec = _tone_phasors(prs, tau[clut])
        eq = _tone_phasors(prs, tau[~clut])[0] if has_target else np.ones((prs.l_prs, prs.n_active), complex)
        cc = np.ascontiguousarray(g_bp[:, clut] * gain[clut], dtype=np.complex128)
        power = np.empty(n_beams)
        shape = (repetitions, prs.l_prs, prs.n_active)
        for lo in range(0, n_beams, chunk_beams):
            hi = min(lo + chunk_beams, n_beams)
            s = np.ascontiguousarray(_prs_symbols(prs, occ[lo:hi]))
            noise = _complex_noise(rng, (hi - lo,) + shape, noise_std)
            power[lo:hi] = kernels.sweep_power(
                s, noise, cc[lo:hi], np.ascontiguousarray(ec), np.ascontiguousarray(tq[lo:hi]),
                np.ascontiguousarray(tt[lo:hi]), np.ascontiguousarray(eq), float(beta2))
    best = int(np.argmax(power))
    return SweepResult(best, codebook.direction(best), power, bool(np.all(power == 0)))


def _sweep_statistic(prs, tq, tt, noise_std, rng, repetitions):
    """Exact distribution of the suppressed sweep power.

    Static clutter is annihilated by the per-offset mean removal; what is
    left is the projected target P x plus projected white noise. Splitting
    the noise along P x and its orthogonal complement gives
    |‖Px‖ + n1|^2 + sigma^2 * Gamma(D - 1) with D = M * L * (R - 1).
    """
    d = tt - tt.mean(axis=1, keepdims=True)
    px = np.abs(tq) * np.sqrt(prs.n_active * np.sum(np.abs(d) ** 2, axis=(1, 2)))
    if noise_std == 0:
        return px ** 2
    var = noise_std ** 2 / prs.comb_k
    dof = prs.n_active * prs.l_prs * (repetitions - 1)
    n1 = _complex_noise(rng, px.shape, np.sqrt(var))
    rest = var * rng.gamma(dof - 1, 1.0, size=px.shape)
    return np.abs(px + n1) ** 2 + rest


def observe_dwell(channel: ChannelRealization, prs: PrsConfig, codebook: Codebook, beam: int,
                  noise_std: float, rng: np.random.Generator | None = None,
                  start_occasion: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Received samples y and PRS symbols s over n_prs occasions on one beam.

    Both are (active tone, slow-time symbol) with column o * L + l.
    """
    if noise_std > 0 and rng is None:
        raise ValueError("a random generator is required when noise_std > 0")
    az, el, tau, gain, fd, clut = _path_arrays(channel)
    n_occ = prs.n_prs
    occ = start_occasion + np.arange(n_occ)
    s = _prs_symbols(prs, np.arange(n_occ))  # (O, L, M)
    x = np.zeros((n_occ, prs.l_prs, prs.n_active), dtype=np.complex128)
    if len(tau):
        g = codebook.monostatic_gain(az, el)[beam]  # (P,)
        e = _tone_phasors(prs, tau)  # (P, L, M)
        if clut.any():
            x += np.einsum("p,plm->lm", g[clut] * gain[clut], e[clut])[None]
        for q in np.flatnonzero(~clut):
            t = _symbol_times(prs, occ)  # (O, L)
            x += (g[q] * gain[q] * np.exp(2j * np.pi * fd[q] * t))[..., None] * e[q][None]
    y = x * s + _complex_noise(rng, x.shape, noise_std)
    to2d = lambda a: a.transpose(2, 0, 1).reshape(prs.n_active, -1)
    return to2d(y), to2d(s)


def process_drop(channel: ChannelRealization, prs: PrsConfig, codebook: Codebook, eta_db: float,
                 noise_std: float, rng: np.random.Generator | None = None,
                 options: ChainOptions | None = None) -> DetectionResult:
    """Full chain for one drop: sweep, dwell, matched filter, suppression, range, PAR, position."""
    opts = options or ChainOptions()
    sweep = beam_sweep(channel, prs, codebook, opts.sweep_repetitions, noise_std, rng,
                       mode=opts.sweep_mode, chunk_beams=opts.chunk_beams)
    start = len(codebook) * opts.sweep_repetitions
    y, s = observe_dwell(channel, prs, codebook, sweep.best_index, noise_std, rng, start)
    h_hat = matched_filter(y, s, prs.beta)
    groups = np.arange(h_hat.shape[1]) % prs.l_prs
    h_tilde = clutter_suppress(h_hat, groups)
    n_r = prs.n_active * opts.zero_pad
    if opts.profile == "averaged":
        prof = range_profile(h_tilde, n_r, prs.comb_k * prs.scs_hz)
        mag = prof.averaged
    else:
        prof = range_profile(h_tilde[:, :1], n_r, prs.comb_k * prs.scs_hz)
        mag = np.abs(prof.bins[:, 0])
    res = par_detect(mag, eta_db)
    res.direction = sweep.direction
    res.beam_index = sweep.best_index
    res.sweep_degenerate = sweep.degenerate
    if res.detected:
        res.range_m = float(res.peak_bin * prof.bin_width_m)
        res.position_m = position_estimate(res.range_m, sweep.direction, opts.bs_position)
    return res
