"""Counter-based randomness.

Every random quantity in the package is a pure function of integers, so a
sample never depends on enumeration order, chunking or thread count.

The mixing function is the SplitMix64 finalizer (Steele, Lea & Flood 2014):

    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27; z *= 0x94D049BB133111EB
    z ^= z >> 31

evaluated modulo 2**64.  On top of it:

    derive_seed(s, i)   = mix64(s + (i + 1) * 0x9E3779B97F4A7C15)
    site_key(x, y)      = (x mod 2**32) << 32 | (y mod 2**32)
    site_bits(s, x, y)  = mix64(mix64(site_key(x, y)) ^ s)
    site_uniform(s,x,y) = (site_bits >> 11) * 2**-53           in [0, 1)

``derive_seed`` is injective in ``i`` for fixed ``s`` (odd increment followed
by a bijection), so stream seeds never collide.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed_base: int, stream_id: int) -> int:
    """Seed of stream ``stream_id`` under ``seed_base`` (both taken mod 2**64)."""
    return mix64((seed_base + ((stream_id + 1) & MASK64) * GOLDEN) & MASK64)


def derive_seeds(seed_base: int, n: int, start: int = 0) -> np.ndarray:
    return np.array([derive_seed(seed_base, i) for i in range(start, start + n)], dtype=np.uint64)


def site_key(x: int, y: int) -> int:
    return ((x & 0xFFFFFFFF) << 32) | (y & 0xFFFFFFFF)


def site_uniform(seed: int, x: int, y: int) -> float:
    return (mix64(mix64(site_key(x, y)) ^ (seed & MASK64)) >> 11) * _INV53


def site_uniforms(seed: int, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorised :func:`site_uniform` over coordinate arrays."""
    with np.errstate(over="ignore"):
        kx = (np.asarray(xs, dtype=np.int64) & 0xFFFFFFFF).astype(np.uint64)
        ky = (np.asarray(ys, dtype=np.int64) & 0xFFFFFFFF).astype(np.uint64)
        z = (kx << np.uint64(32)) | ky
        z = _mix64_np(z)
        z = _mix64_np(z ^ np.uint64(seed & MASK64))
        return (z >> np.uint64(11)).astype(np.float64) * _INV53


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


# numba versions; keep every operand uint64 or numba promotes to float


@njit(cache=True, inline="always")
def nb_mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def nb_site_uniform(seed, x, y):
    kx = np.uint64(x & 0xFFFFFFFF)
    ky = np.uint64(y & 0xFFFFFFFF)
    z = nb_mix64((kx << np.uint64(32)) | ky)
    z = nb_mix64(z ^ np.uint64(seed))
    return np.float64(z >> np.uint64(11)) * _INV53
