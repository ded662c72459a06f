"""numba kernels for single-site heat-bath dynamics on a neighbor table.

A neighbor table ``nbr`` has shape (N, k); row i lists the k neighbors of
site i.  Random numbers come from ``counter_uniform(key, t, i)`` where t is
the sweep counter and i the update slot, so coupled chains share updates by
sharing (key, t, i).
"""
import math

import numpy as np
from numba import njit

from .._rng import counter_uniform

INIT_STREAM = 1 << 40


@njit(cache=True)
def ising_prob_plus(beta, h, s):
    return 1.0 / (1.0 + math.exp(-2.0 * beta * (h + s)))


@njit(cache=True)
def _site_for(key, t, j, n, random_scan):
    if random_scan:
        return min(int(counter_uniform(key, t, 2 * j + 1) * n), n - 1)
    return j


@njit(cache=True, nogil=True)
def ising_sweeps(spins, nbr, beta, h, key, counters, random_scan):
    """Heat-bath sweeps in place; ``counters`` lists the sweep counters in run order."""
    n, k = nbr.shape
    for t in counters:
        for j in range(n):
            i = _site_for(key, t, j, n, random_scan)
            s = 0
            for c in range(k):
                s += spins[nbr[i, c]]
            u = counter_uniform(key, t, 2 * j)
            spins[i] = 1 if u < ising_prob_plus(beta, h, s) else -1


@njit(cache=True, nogil=True)
def ising_sandwich(upper, lower, nbr, beta, h, key, counters, random_scan):
    """Run two coupled chains; returns False if domination ever fails."""
    n, k = nbr.shape
    for t in counters:
        for j in range(n):
            i = _site_for(key, t, j, n, random_scan)
            su = 0
            sl = 0
            for c in range(k):
                su += upper[nbr[i, c]]
                sl += lower[nbr[i, c]]
            u = counter_uniform(key, t, 2 * j)
            upper[i] = 1 if u < ising_prob_plus(beta, h, su) else -1
            lower[i] = 1 if u < ising_prob_plus(beta, h, sl) else -1
            if upper[i] < lower[i]:
                return False
    return True


@njit(cache=True, nogil=True)
def ising_cftp(nbr, beta, h, key, max_log2, random_scan):
    """Monotone coupling from the past.

    Sweep counter c drives the sweep at time -(c+1).  Returns (spins, horizon);
    horizon is -1 when 2**max_log2 sweeps did not coalesce and -2 if the
    sandwich was violated.
    """
    n = nbr.shape[0]
    horizon = 1
    for _ in range(max_log2 + 1):
        upper = np.ones(n, dtype=np.int8)
        lower = -np.ones(n, dtype=np.int8)
        counters = np.arange(horizon - 1, -1, -1)
        if not ising_sandwich(upper, lower, nbr, beta, h, key, counters, random_scan):
            return upper, -2
        same = True
        for i in range(n):
            if upper[i] != lower[i]:
                same = False
                break
        if same:
            return upper, horizon
        horizon *= 2
    return upper, -1


@njit(cache=True, nogil=True)
def ising_cftp_batch(nbr, beta, h, keys, max_log2, random_scan):
    out = np.empty((keys.shape[0], nbr.shape[0]), dtype=np.int8)
    horizons = np.empty(keys.shape[0], dtype=np.int64)
    for r in range(keys.shape[0]):
        s, hz = ising_cftp(nbr, beta, h, keys[r], max_log2, random_scan)
        out[r] = s
        horizons[r] = hz
    return out, horizons


@njit(cache=True, nogil=True)
def random_init(key, n, alphabet_size):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = min(int(counter_uniform(key, INIT_STREAM, i) * alphabet_size),
                     alphabet_size - 1)
    return out


@njit(cache=True, nogil=True)
def mrf_sweeps(state, nbr, cdf, w, key, counters, random_scan):
    """Inverse-CDF heat bath for a tabulated kernel.

    ``cdf[code, a]`` is P(sigma <= alphabet[a] | boundary code), with the
    boundary code the base-``w`` number formed by the neighbor states in
    table order (first neighbor most significant).
    """
    n, k = nbr.shape
    for t in counters:
        for j in range(n):
            i = _site_for(key, t, j, n, random_scan)
            code = 0
            for c in range(k):
                code = code * w + state[nbr[i, c]]
            u = counter_uniform(key, t, 2 * j)
            a = 0
            while a < w - 1 and u >= cdf[code, a]:
                a += 1
            state[i] = a


@njit(cache=True, nogil=True)
def mrf_sweeps_many(states, nbr, cdf, w, key, counters, random_scan):
    for r in range(states.shape[0]):
        mrf_sweeps(states[r], nbr, cdf, w, key, counters, random_scan)


@njit(cache=True, nogil=True)
def ising_probe_count(nbr, beta, h, keys, k, sites):
    """Count replications where k reverse-time sweeps leave some of ``sites``
    undetermined (all-plus and all-minus chains disagree there)."""
    n = nbr.shape[0]
    counters = np.arange(k - 1, -1, -1)
    count = 0
    for r in range(keys.shape[0]):
        upper = np.ones(n, dtype=np.int8)
        lower = -np.ones(n, dtype=np.int8)
        ok = ising_sandwich(upper, lower, nbr, beta, h, keys[r], counters, False)
        if not ok:
            return -1
        for s in sites:
            if upper[s] != lower[s]:
                count += 1
                break
    return count
