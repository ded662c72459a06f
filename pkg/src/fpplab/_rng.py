"""Seed derivation and a counter-based uniform generator.

Every random draw in the package is a pure function of a 64-bit key and a
counter, so replications, sweeps and sites can be evaluated in any order
(and on any thread) without changing results.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

MASK64 = (1 << 64) - 1


def derive_key(seed, *path):
    """Return a uint64 stream key for ``seed`` and an integer path.

    Distinct paths (e.g. ``(replication,)`` or ``(size_index, replication)``)
    give statistically independent streams.
    """
    if not 0 <= int(seed) <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    entropy = [int(seed) & 0xFFFFFFFF, int(seed) >> 32]
    ss = np.random.SeedSequence(entropy, spawn_key=tuple(int(p) for p in path))
    return np.uint64(ss.generate_state(1, dtype=np.uint64)[0])


def generator(seed, *path):
    """numpy Generator on the stream ``(seed, *path)``."""
    return np.random.Generator(np.random.PCG64(int(derive_key(seed, *path))))


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always")
def counter_uniform(key, t, i):
    """Uniform in [0, 1) addressed by (key, t, i); t and i are nonnegative."""
    z = _mix(key + np.uint64(t) * _GOLDEN)
    z = _mix(z ^ (np.uint64(i) * _M2 + _GOLDEN))
    return np.float64(z >> _S11) * _INV53
