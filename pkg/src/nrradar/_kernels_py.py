"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable, and as the
reference the compiled versions are tested against.
"""

import numpy as np

GOLD_OFFSET = 1600


def gold_batch(c_inits, length):
    """Gold sequences for many c_init values at once, shape (len(c_inits), length)."""
    c_inits = np.asarray(c_inits, dtype=np.int64)
    n_seq = c_inits.size
    total = length + GOLD_OFFSET
    x1 = np.zeros(total + 31, dtype=np.uint8)
    x1[0] = 1
    x2 = np.zeros((n_seq, total + 31), dtype=np.uint8)
    x2[:, :31] = (c_inits[:, None] >> np.arange(31)) & 1
    # x(n+31) only depends on x(n..n+3), so 28 new bits are known per step
    for n in range(0, total, 28):
        hi = min(n + 28, total)
        x1[n + 31:hi + 31] = x1[n + 3:hi + 3] ^ x1[n:hi]
        x2[:, n + 31:hi + 31] = (x2[:, n + 3:hi + 3] ^ x2[:, n + 2:hi + 2]
                                 ^ x2[:, n + 1:hi + 1] ^ x2[:, n:hi])
    return x1[GOLD_OFFSET:total] ^ x2[:, GOLD_OFFSET:total]


def sweep_power(s, noise, cc, ec, tq, tt, eq, beta2):
    """Clutter-suppressed received power per beam.

    s, noise : (B, R, L, M) PRS symbols and receiver noise per beam dwell
    cc : (B, Pc) clutter beam-path coefficients; ec : (Pc, L, M) tone phasors
    tq : (B,) target coefficient; tt : (B, R, L) Doppler phasors; eq : (L, M)
    """
    n_b, n_r, n_l, n_m = s.shape
    if cc.shape[1]:
        clutter = (cc @ ec.reshape(ec.shape[0], -1)).reshape(n_b, 1, n_l, n_m)
    else:
        clutter = np.zeros((n_b, 1, n_l, n_m), dtype=np.complex128)
    x = clutter + (tq[:, None, None] * tt)[..., None] * eq[None, None]
    y = x * s + noise
    h = np.conj(s) * y / beta2
    h -= h.mean(axis=1, keepdims=True)
    return np.einsum("brlm,brlm->b", h.real, h.real) + np.einsum("brlm,brlm->b", h.imag, h.imag)
