"""Finite-alphabet Markov random fields given by a local conditional kernel."""
from dataclasses import dataclass
import itertools

import numpy as np

from .._rng import derive_key
from ..lattice import BoxSpec, LatticeError
from . import _kernels as K
from .fields import ValidationError, WeightField
from .ising import cover_neighbor_table, ising_conditional

SUM_TOL = 1e-12


@dataclass
class LocalKernel:
    """Conditional law P(sigma_v = w | boundary) on a finite alphabet.

    ``table`` has shape ``(|W|,) * k + (|W|,)``: the first k axes index the
    boundary states (alphabet positions, in neighbor-table order) and the
    last axis the value at v.  ``k = 2d`` in site mode and ``4d - 2`` in bond
    mode (edges sharing an endpoint).
    """

    alphabet: tuple
    d: int
    table: np.ndarray
    mode: str = "site"

    def __post_init__(self):
        self.alphabet = tuple(float(a) for a in self.alphabet)
        if self.mode not in ("site", "bond"):
            raise ValidationError(f"unknown kernel mode {self.mode!r}")
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise ValidationError("alphabet must be nonempty with distinct values")
        w, k = len(self.alphabet), self.boundary_size
        tab = np.asarray(self.table, dtype=np.float64)
        if tab.shape != (w,) * (k + 1):
            raise ValidationError(
                f"incomplete kernel table: shape {tab.shape}, need {(w,) * (k + 1)}")
        if np.any(tab < 0) or np.any(np.abs(tab.sum(axis=-1) - 1.0) > SUM_TOL):
            raise ValidationError("each conditional distribution must sum to 1")
        self.table = tab

    @property
    def boundary_size(self):
        return 2 * self.d if self.mode == "site" else 4 * self.d - 2

    @property
    def flat(self):
        w = len(self.alphabet)
        return self.table.reshape(w**self.boundary_size, w)

    @classmethod
    def from_function(cls, fn, alphabet, d, mode="site"):
        """Tabulate ``fn(boundary_values) -> sequence of probabilities``."""
        alphabet = tuple(alphabet)
        k = 2 * d if mode == "site" else 4 * d - 2
        w = len(alphabet)
        tab = np.empty((w,) * (k + 1))
        for idx in itertools.product(range(w), repeat=k):
            tab[idx] = fn(tuple(alphabet[i] for i in idx))
        return cls(alphabet, d, tab, mode)

    @classmethod
    def from_mapping(cls, mapping, alphabet, d, mode="site"):
        """Build from ``{boundary tuple of values: probabilities}``; every boundary required."""
        alphabet = tuple(alphabet)
        k = 2 * d if mode == "site" else 4 * d - 2
        missing = [eta for eta in itertools.product(alphabet, repeat=k) if eta not in mapping]
        if missing:
            raise ValidationError(f"incomplete kernel table: {len(missing)} boundaries missing")
        return cls.from_function(lambda eta: mapping[eta], alphabet, d, mode)

    def is_monotone(self) -> bool:
        """Stochastic monotonicity w.r.t. the alphabet order of values.

        Checked on single-coordinate boundary increments, which suffices by
        transitivity.
        """
        order = np.argsort(self.alphabet)
        if not np.array_equal(order, np.arange(len(self.alphabet))):
            return False
        cdf = np.cumsum(self.table, axis=-1)
        for ax in range(self.boundary_size):
            lo = np.take(cdf, np.arange(len(self.alphabet) - 1), axis=ax)
            hi = np.take(cdf, np.arange(1, len(self.alphabet)), axis=ax)
            if np.any(hi > lo + 1e-12):
                return False
        return True


def ising_kernel(beta, h, d, mode="site"):
    """Ising conditional law on alphabet (-1, +1)."""
    return LocalKernel.from_function(
        lambda eta: (1 - ising_conditional(beta, h, sum(eta)), ising_conditional(beta, h, sum(eta))),
        (-1.0, 1.0), d, mode)


def iid_kernel(values, probs, d, mode="site"):
    probs = tuple(probs)
    return LocalKernel.from_function(lambda eta: probs, values, d, mode)


def copy_neighbor_kernel(values, d, which=0, mode="site"):
    """Deterministically copies boundary position ``which``."""
    values = tuple(values)

    def fn(eta):
        return tuple(1.0 if v == eta[which] else 0.0 for v in values)
    return LocalKernel.from_function(fn, values, d, mode)


def hn_gamma(kernel: LocalKernel, mode=None):
    """Return (gamma, satisfies) for the high-noise condition.

    gamma sums over w the minimum over boundaries of P(sigma_v = w | boundary);
    the threshold is (k - 1) / k with k = 2d (site) or 4d - 2 (bond).
    """
    mode = mode or kernel.mode
    gamma = float(kernel.flat.min(axis=0).sum())
    k = 2 * kernel.d if mode == "site" else 4 * kernel.d - 2
    return gamma, bool(gamma > (k - 1) / k)


def hn_threshold(d, mode="site"):
    k = 2 * d if mode == "site" else 4 * d - 2
    return (k - 1) / k


def kernel_neighbor_table(kernel: LocalKernel, torus: BoxSpec):
    if torus.mode != "torus":
        raise LatticeError("MRF sampling needs a torus box")
    if torus.d != kernel.d:
        raise ValidationError("kernel dimension does not match torus")
    return torus.neighbor_table if kernel.mode == "site" else cover_neighbor_table(torus)


def _init_states(init, n, w, key):
    if isinstance(init, str):
        if init == "min":
            return np.zeros(n, dtype=np.int64)
        if init == "max":
            return np.full(n, w - 1, dtype=np.int64)
        if init == "random":
            return K.random_init(key, n, w)
        raise ValueError(f"unknown init {init!r}")
    arr = np.asarray(init, dtype=np.int64).ravel()
    if arr.size != n or arr.min() < 0 or arr.max() >= w:
        raise ValidationError("explicit init must hold alphabet positions")
    return arr.copy()


def mrf_gibbs(kernel: LocalKernel, torus: BoxSpec, sweeps, seed=0, init="random",
              scan="systematic", as_weights=False):
    """Systematic-scan (or random-scan) Gibbs sweeps for ``kernel`` on ``torus``.

    Returns alphabet values: shape ``torus.shape`` in site mode and
    ``(d,) + torus.shape`` in bond mode.  With ``as_weights`` a
    :class:`WeightField` is returned, which requires a positive alphabet.
    """
    if sweeps < 0:
        raise ValueError("sweeps must be >= 0")
    nbr = kernel_neighbor_table(kernel, torus)
    w = len(kernel.alphabet)
    key = derive_key(seed)
    state = _init_states(init, nbr.shape[0], w, key)
    cdf = np.cumsum(kernel.flat, axis=1)
    K.mrf_sweeps(state, nbr, cdf, w, key, np.arange(sweeps, dtype=np.int64), scan == "random")
    vals = np.asarray(kernel.alphabet)[state]
    shape = torus.shape if kernel.mode == "site" else (torus.d,) + torus.shape
    vals = vals.reshape(shape)
    if not as_weights:
        return vals
    if min(kernel.alphabet) <= 0:
        raise ValidationError("MRF weights need strictly positive alphabet values")
    return WeightField(torus, kernel.mode, vals, {"sampler": "gibbs", "sweeps": sweeps, "seed": seed})
