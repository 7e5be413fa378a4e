"""PRS resource grid generation: Gold sequence, QPSK mapping and comb allocation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels

SUBCARRIERS_PER_RB = 12
SYMBOLS_PER_SLOT = 14
GOLD_OFFSET = 1600

VALID_COMB = (2, 4, 6, 12)
VALID_LPRS = (2, 4, 6, 12)

# Relative RE offset k' per PRS symbol (l - l_start), TS 38.211 Table 7.4.1.7.3-1.
_STANDARD_OFFSETS = {
    2: (0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1),
    4: (0, 2, 1, 3, 0, 2, 1, 3, 0, 2, 1, 3),
    6: (0, 3, 1, 4, 2, 5, 0, 3, 1, 4, 2, 5),
    12: (0, 6, 3, 9, 1, 7, 4, 10, 2, 8, 5, 11),
}


@dataclass(frozen=True)
class PrsConfig:
    n_rb: int = 66
    scs_khz: float = 120.0
    comb_k: int = 4
    l_prs: int = 4
    n_prs: int = 256
    t_prs: float = 0.125e-3
    seq_id: int = 0
    carrier_hz: float = 30e9
    symbol_start: int = 0
    re_offsets: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.comb_k not in VALID_COMB:
            raise ValueError(f"comb_k must be one of {VALID_COMB}, got {self.comb_k}")
        if self.l_prs not in VALID_LPRS:
            raise ValueError(f"l_prs must be one of {VALID_LPRS}, got {self.l_prs}")
        if self.l_prs < self.comb_k:
            raise ValueError(f"l_prs ({self.l_prs}) must be >= comb_k ({self.comb_k})")
        if self.n_rb < 1 or (SUBCARRIERS_PER_RB * self.n_rb) % self.comb_k:
            raise ValueError("12 * n_rb must be a positive multiple of comb_k")
        if self.n_prs < 1:
            raise ValueError("n_prs must be >= 1")
        if not 0 <= self.seq_id < 4096:
            raise ValueError("seq_id must be in [0, 4096)")
        if self.symbol_start < 0 or self.symbol_start + self.l_prs > SYMBOLS_PER_SLOT:
            raise ValueError("PRS symbols must fit within one slot")
        if self.t_prs <= self.l_prs * self.symbol_duration_s:
            raise ValueError("t_prs must exceed l_prs symbol durations")
        if self.re_offsets is not None:
            offs = tuple(int(o) for o in self.re_offsets)
            if len(offs) != self.l_prs or any(not 0 <= o < self.comb_k for o in offs):
                raise ValueError("re_offsets needs l_prs entries in [0, comb_k)")
            object.__setattr__(self, "re_offsets", offs)

    @property
    def scs_hz(self) -> float:
        return self.scs_khz * 1e3

    @property
    def numerology(self) -> int:
        return int(round(np.log2(self.scs_khz / 15.0)))

    @property
    def n_subcarriers(self) -> int:
        return SUBCARRIERS_PER_RB * self.n_rb

    @property
    def n_active(self) -> int:
        return self.n_subcarriers // self.comb_k

    @property
    def beta(self) -> float:
        return float(np.sqrt(self.comb_k))

    @property
    def wavelength_m(self) -> float:
        from .constants import SPEED_OF_LIGHT

        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def symbol_duration_s(self) -> float:
        # average symbol duration including CP: one slot is 14 symbols
        return 1e-3 / (2 ** self.numerology) / SYMBOLS_PER_SLOT

    @property
    def symbols_per_period(self) -> int:
        """T_PRS expressed in OFDM symbols (rounded to the symbol grid)."""
        return max(int(round(self.t_prs / self.symbol_duration_s)), self.l_prs + 1)

    @property
    def slots_per_frame(self) -> int:
        return 10 * 2 ** self.numerology

    @property
    def offsets(self) -> tuple[int, ...]:
        if self.re_offsets is not None:
            return self.re_offsets
        return _STANDARD_OFFSETS[self.comb_k][: self.l_prs]

    def symbol_time_s(self, occasion: int, symbol: int) -> float:
        idx = occasion * self.symbols_per_period + self.symbol_start + symbol
        return idx * self.symbol_duration_s


@dataclass(frozen=True)
class ResourceGrid:
    """PRS symbols of one occasion.

    ``values`` is indexed (subcarrier, symbol). ``active_mask`` has the same
    shape because the comb offset is staggered from symbol to symbol.
    """

    values: np.ndarray
    active_mask: np.ndarray
    offsets: tuple[int, ...]
    comb_k: int

    @property
    def beta(self) -> float:
        return float(np.sqrt(self.comb_k))

    def active_subcarriers(self, symbol: int) -> np.ndarray:
        return np.flatnonzero(self.active_mask[:, symbol])

    def tone_symbols(self) -> np.ndarray:
        """Active-tone view: (n_active, l_prs), row m is subcarrier m*K + offset_l."""
        cols = [self.values[self.active_mask[:, l], l] for l in range(self.values.shape[1])]
        return np.stack(cols, axis=1)


def gold_sequence(c_init: int, length: int) -> np.ndarray:
    """Length-31 Gold sequence c(n) used for NR pseudo-random sequences."""
    c_init = int(c_init)
    if c_init < 0 or c_init >= 1 << 31:
        raise ValueError(f"c_init must be in [0, 2^31), got {c_init}")
    if length < 0:
        raise ValueError("length must be non-negative")
    if length == 0:
        return np.zeros(0, dtype=np.uint8)
    return kernels.gold_batch(np.array([c_init], dtype=np.int64), length)[0]


def qpsk_map(bits) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64)
    if b.ndim != 1 or b.size % 2:
        raise ValueError("qpsk_map needs an even number of bits")
    return ((1 - 2 * b[0::2]) + 1j * (1 - 2 * b[1::2])) / np.sqrt(2)


def prs_c_init(seq_id: int, slot: int, symbol: int) -> int:
    hi = seq_id // 1024
    lo = seq_id % 1024
    val = (1 << 22) * hi + (1 << 10) * (SYMBOLS_PER_SLOT * slot + symbol + 1) * (2 * lo + 1) + lo
    return val % (1 << 31)


def _c_inits(config: PrsConfig, occasions) -> np.ndarray:
    out = []
    for occ in occasions:
        slot = occ % config.slots_per_frame
        for l in range(config.l_prs):
            out.append(prs_c_init(config.seq_id, slot, config.symbol_start + l))
    return np.array(out, dtype=np.int64)


def build_prs_grid(config: PrsConfig, occasion_index: int) -> ResourceGrid:
    if not 0 <= occasion_index < config.n_prs:
        raise ValueError(f"occasion_index {occasion_index} outside [0, {config.n_prs})")
    tones = prs_tone_block(config)[:, occasion_index * config.l_prs:(occasion_index + 1) * config.l_prs]
    values = np.zeros((config.n_subcarriers, config.l_prs), dtype=np.complex128)
    mask = np.zeros_like(values, dtype=bool)
    m = np.arange(config.n_active)
    for l, off in enumerate(config.offsets):
        k = m * config.comb_k + off
        values[k, l] = tones[:, l]
        mask[k, l] = True
    return ResourceGrid(values, mask, config.offsets, config.comb_k)


@lru_cache(maxsize=8)
def prs_tone_block(config: PrsConfig) -> np.ndarray:
    """Scaled PRS symbols on active tones for every occasion.

    Shape (n_active, n_prs * l_prs); column ``o * l_prs + l`` is symbol l of
    occasion o. Read-only and cached per config.
    """
    bits = kernels.gold_batch(_c_inits(config, range(config.n_prs)), 2 * config.n_active)
    b = bits.astype(np.int8)
    sym = ((1 - 2 * b[:, 0::2]) + 1j * (1 - 2 * b[:, 1::2])) / np.sqrt(2)
    block = np.ascontiguousarray(config.beta * sym.T)
    block.setflags(write=False)
    return block
