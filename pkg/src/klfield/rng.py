"""Counter-based standard-normal variates.

Every variate is a pure function of ``(seed, counter)``: a Philox4x32-10
block supplies two 53-bit uniforms, which one Box-Muller step turns into a
single normal. Nothing depends on generation order, so any subset of a
stream can be produced independently and in any order.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

# domain-separation tags carried in the last counter word
STREAM_TAG = 0
BATCH_TAG = 1


def philox4x32(c0, c1, c2, c3, k0, k1, rounds: int = 10):
    """Philox4x32 block function, vectorized over counter arrays."""
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint32) for c in np.broadcast_arrays(c0, c1, c2, c3))
    k0 = np.uint32(k0)
    k1 = np.uint32(k1)
    with np.errstate(over="ignore"):
        for r in range(rounds):
            p0 = _M0 * c0.astype(np.uint64)
            p1 = _M1 * c2.astype(np.uint64)
            hi0 = (p0 >> _SHIFT32).astype(np.uint32)
            lo0 = (p0 & _MASK32).astype(np.uint32)
            hi1 = (p1 >> _SHIFT32).astype(np.uint32)
            lo1 = (p1 & _MASK32).astype(np.uint32)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
            if r + 1 < rounds:
                k0 = k0 + _W0
                k1 = k1 + _W1
    return c0, c1, c2, c3


def _split_seed(seed: int):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed & 0xFFFFFFFF, seed >> 32


def _to_unit(hi, lo):
    # 53 random bits -> [0, 1)
    bits = (hi.astype(np.uint64) >> np.uint64(5)) * np.uint64(1 << 26) + (lo.astype(np.uint64) >> np.uint64(6))
    return bits.astype(np.float64) * (1.0 / 9007199254740992.0)


def normals_at(seed: int, c0, c1, c2, c3) -> np.ndarray:
    """Standard normals for the given counters under ``seed``."""
    k0, k1 = _split_seed(seed)
    x0, x1, x2, x3 = philox4x32(c0, c1, c2, c3, k0, k1)
    u1 = 1.0 - _to_unit(x0, x1)  # (0, 1]
    u2 = _to_unit(x2, x3)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def standard_normal_stream(seed: int, count: int) -> np.ndarray:
    """The first ``count`` variates of the stream keyed by ``seed``."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    k = np.arange(count, dtype=np.uint64)
    return normals_at(seed, k & _MASK32, k >> _SHIFT32, 0, STREAM_TAG)


def normal_matrix(seed: int, rows, cols) -> np.ndarray:
    """Variates ``xi[m, i]`` keyed by ``(seed, m, i)``.

    ``rows`` and ``cols`` are sample and mode indices (an int ``n`` means
    ``range(n)``). Entry ``(m, i)`` is the same whatever else is requested.
    """
    m = np.arange(rows, dtype=np.uint64) if np.ndim(rows) == 0 else np.asarray(rows, dtype=np.uint64)
    i = np.arange(cols, dtype=np.uint64) if np.ndim(cols) == 0 else np.asarray(cols, dtype=np.uint64)
    mm, ii = np.meshgrid(m, i, indexing="ij")
    return normals_at(seed, ii & _MASK32, mm & _MASK32, mm >> _SHIFT32, BATCH_TAG)
