"""Ising spins on a torus: heat-bath Gibbs sampling, exact sampling by
monotone coupling from the past, and the weight fields built from spins."""
import math
import warnings

import numpy as np

from .._rng import derive_key
from ..lattice import BoxSpec, LatticeError
from . import _kernels as K
from .fields import SpinField, ValidationError, WeightField

CFTP_MAX_LOG2 = 20


class CoalescenceError(RuntimeError):
    pass


def ising_conditional(beta, h, s):
    """P(spin = +1) given field ``h`` and neighbor spin sum ``s``.

    ``exp(beta(h+s)) / (exp(beta(h+s)) + exp(-beta(h+s)))``, evaluated as a
    logistic to stay finite for large arguments.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    x = 2.0 * beta * (h + s)
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _require_torus(box):
    if box.mode != "torus":
        raise LatticeError("Ising sampling needs a torus box")


def cover_neighbor_table(box: BoxSpec) -> np.ndarray:
    """Neighbor table of the edge graph of a torus (edges sharing an endpoint).

    Edge ``a * N + x`` joins site x to x + e_a.  Each edge has 4d - 2
    neighbors: the other 2d - 1 edges at its tail, then the other 2d - 1 at
    its head.
    """
    _require_torus(box)
    nbr = box.neighbor_table
    n, d = box.size, box.d
    cols = []
    for a in range(d):
        x = np.arange(n)
        y = nbr[:, 2 * a + 1]
        rows = []
        for b in range(d):
            if b != a:
                rows.append(b * n + x)              # (x, b)
            rows.append(b * n + nbr[x, 2 * b])      # (x - e_b, b)
        for b in range(d):
            rows.append(b * n + y)                  # (y, b)
            if b != a:
                rows.append(b * n + nbr[y, 2 * b])  # (y - e_b, b)
        cols.append(np.stack(rows, axis=1))
    table = np.concatenate(cols, axis=0).astype(np.int64)
    assert table.shape == (d * n, 4 * d - 2)
    return table


def _init_spins(init, n, key):
    if isinstance(init, str):
        if init in ("plus", "all-plus"):
            return np.ones(n, dtype=np.int8)
        if init in ("minus", "all-minus"):
            return -np.ones(n, dtype=np.int8)
        if init == "random":
            return (2 * K.random_init(key, n, 2) - 1).astype(np.int8)
        raise ValueError(f"unknown init {init!r}")
    arr = np.asarray(init).astype(np.int8).ravel()
    if arr.size != n or not np.all((arr == 1) | (arr == -1)):
        raise ValidationError("explicit init must be a ±1 array of the right size")
    return arr.copy()


def gibbs_on_table(nbr, beta, h, sweeps, init, key, scan="systematic"):
    if beta < 0 or sweeps < 0:
        raise ValueError("need beta >= 0 and sweeps >= 0")
    spins = _init_spins(init, nbr.shape[0], key)
    K.ising_sweeps(spins, nbr, float(beta), float(h), key,
                   np.arange(sweeps, dtype=np.int64), scan == "random")
    return spins


def gibbs_ising(torus: BoxSpec, beta, h, sweeps, init="random", seed=0,
                scan="systematic") -> SpinField:
    """Heat-bath Gibbs sampler on ``torus``.

    Sites are visited in lexicographic order (``scan="systematic"``) or
    uniformly at random (``scan="random"``), ``sweeps`` times N updates.
    """
    _require_torus(torus)
    key = derive_key(seed)
    spins = gibbs_on_table(torus.neighbor_table, beta, h, sweeps, init, key, scan)
    return SpinField(torus, spins, {"sampler": "gibbs", "sweeps": sweeps, "seed": seed})


def cftp_on_table(nbr, beta, h, key, max_log2=CFTP_MAX_LOG2, scan="systematic"):
    if beta < 0:
        raise ValueError("beta must be >= 0")
    spins, horizon = K.ising_cftp(nbr, float(beta), float(h), key, max_log2, scan == "random")
    if horizon == -1:
        raise CoalescenceError(f"no coalescence within horizon 2**{max_log2} sweeps")
    if horizon == -2:
        raise AssertionError("monotone sandwich violated")
    return spins, int(horizon)


def cftp_ising(torus: BoxSpec, beta, h, seed=0, max_log2=CFTP_MAX_LOG2,
               scan="systematic") -> SpinField:
    """Exact sample from the torus Ising measure (Propp-Wilson).

    The all-plus and all-minus chains are started at time -T with shared
    update variables, T = 1, 2, 4, ...; the sweep at time -(c+1) always uses
    the same randomness, whatever T.
    """
    _require_torus(torus)
    spins, horizon = cftp_on_table(torus.neighbor_table, beta, h, derive_key(seed), max_log2, scan)
    return SpinField(torus, spins, {"sampler": "cftp", "horizon": horizon, "seed": seed})


def cftp_ising_many(torus: BoxSpec, beta, h, n_samples, seed=0, max_log2=CFTP_MAX_LOG2):
    """``n_samples`` independent exact samples as an (n_samples, N) int8 array."""
    _require_torus(torus)
    keys = np.array([derive_key(seed, r) for r in range(n_samples)], dtype=np.uint64)
    out, horizons = K.ising_cftp_batch(torus.neighbor_table, float(beta), float(h),
                                       keys, max_log2, False)
    if np.any(horizons == -2):
        raise AssertionError("monotone sandwich violated")
    if np.any(horizons == -1):
        raise CoalescenceError(f"no coalescence within horizon 2**{max_log2} sweeps")
    return out, horizons


def spins_to_ab(spins: SpinField, a, b) -> WeightField:
    """Site weights: a where the spin is -1, b where it is +1."""
    if a > b:
        raise ValidationError("need a <= b")
    vals = np.where(spins.spins > 0, float(b), float(a))
    return WeightField(spins.box, "site", vals, dict(spins.meta))


def edge_spins_to_ab(box: BoxSpec, edge_spins, a, b) -> WeightField:
    """Bond weights from spins living on the edges (cover-graph Ising)."""
    if a > b:
        raise ValidationError("need a <= b")
    vals = np.where(np.asarray(edge_spins).reshape((box.d,) + box.shape) > 0, float(b), float(a))
    return WeightField(box, "bond", vals)


def sign_change_weights(spins: SpinField) -> WeightField:
    """Bond weights t(e) = 1 across a sign change, 0 on monochromatic edges."""
    s = spins.spins
    d = spins.box.d
    vals = np.stack([(s != np.roll(s, -1, axis=a)).astype(np.float64) for a in range(d)])
    meta = dict(spins.meta)
    if d != 2:
        meta["warning"] = "sign-change variance bound is only established for d=2"
        warnings.warn(meta["warning"], stacklevel=2)
    return WeightField(spins.box, "bond", vals, meta)
