"""Model specifications, field generation and determination probes."""
from dataclasses import asdict, dataclass, field
import itertools

import numpy as np
from scipy import stats

from .._rng import derive_key, generator
from ..lattice import BoxSpec, LatticeError
from . import _kernels as K
from .fields import ValidationError, WeightField, model_hash
from .ising import (CFTP_MAX_LOG2, cftp_on_table, cover_neighbor_table, edge_spins_to_ab,
                    gibbs_on_table, sign_change_weights, spins_to_ab)
from .fields import SpinField
from .mrf import LocalKernel, copy_neighbor_kernel, iid_kernel, ising_kernel, kernel_neighbor_table

KINDS = ("iid-two-valued", "iid-general", "ising-ab-site", "ising-ab-bond", "mrf-hn",
         "ising-signchange")
DEFAULT_BURN_IN = 64
TINY_STATE_SPACE = 4096


class ProbeUnavailable(RuntimeError):
    pass


@dataclass
class ModelSpec:
    """Everything needed to generate one weight field, given a box and seed.

    ``kernel`` is a plain dict so the spec serializes: ``{"type": "ising",
    "beta": .., "h": .., "values": [a, b]}``, ``{"type": "iid", "values": [..], "probs": [..]}``,
    ``{"type": "copy", "values": [..], "which": 0}`` or ``{"type": "table",
    "alphabet": [..], "table": [flat row-major probabilities]}``.
    """

    kind: str
    a: float = 1.0
    b: float = 2.0
    p: float = 0.5
    beta: float = 0.0
    h: float = 0.0
    values: tuple = ()
    probs: tuple = ()
    kernel: dict = field(default_factory=dict)
    kernel_mode: str = "site"
    indexing: str = "site"
    sampler: str = "gibbs"
    sweeps: int = DEFAULT_BURN_IN
    scan: str = "systematic"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown model kind {self.kind!r}")
        if self.a > self.b:
            raise ValidationError("need a <= b")
        if self.kind.startswith("ising-ab") and self.a <= 0:
            raise ValidationError("{a,b}-valued Ising weights need a > 0")
        if self.sampler not in ("gibbs", "cftp"):
            raise ValidationError(f"unknown sampler {self.sampler!r}")
        if self.sampler == "cftp" and self.kind == "mrf-hn":
            raise ValidationError("cftp is only implemented for Ising models")
        if self.sweeps < 0:
            raise ValidationError("sweeps must be >= 0")
        if self.beta < 0:
            raise ValidationError("beta must be >= 0")
        self.values = tuple(float(x) for x in self.values)
        self.probs = tuple(float(x) for x in self.probs)
        if self.kind == "ising-signchange":
            self.indexing = "bond"
        elif self.kind == "ising-ab-site":
            self.indexing = "site"
        elif self.kind == "ising-ab-bond":
            self.indexing = "bond"
        elif self.kind == "mrf-hn":
            self.indexing = self.kernel_mode

    @property
    def dependent(self):
        return not self.kind.startswith("iid")

    def distribution(self):
        """(values, probs) for i.i.d. kinds."""
        if self.kind == "iid-two-valued":
            return (self.a, self.b), (1.0 - self.p, self.p)
        if self.kind == "iid-general":
            return self.values, self.probs
        raise ValidationError(f"{self.kind} is not an i.i.d. model")

    def build_kernel(self, d) -> LocalKernel:
        kd = dict(self.kernel)
        kind = kd.pop("type", None)
        if kind is None and self.kind.startswith("iid"):
            vals, probs = self.distribution()
            return iid_kernel(vals, probs, d, self.kernel_mode)
        if kind is None and self.kind.startswith("ising"):
            kind = "ising"
        if kind == "ising":
            k = ising_kernel(kd.get("beta", self.beta), kd.get("h", self.h), d, self.kernel_mode)
            if "values" in kd:
                # spins read as weights: -1 -> values[0], +1 -> values[1]
                k = LocalKernel(tuple(kd["values"]), d, k.table, self.kernel_mode)
            return k
        if kind == "iid":
            return iid_kernel(kd["values"], kd["probs"], d, self.kernel_mode)
        if kind == "copy":
            return copy_neighbor_kernel(kd["values"], d, kd.get("which", 0), self.kernel_mode)
        if kind == "table":
            alphabet = tuple(kd["alphabet"])
            w = len(alphabet)
            k = 2 * d if self.kernel_mode == "site" else 4 * d - 2
            tab = np.asarray(kd["table"], dtype=float).reshape((w,) * (k + 1))
            return LocalKernel(alphabet, d, tab, self.kernel_mode)
        raise ValidationError(f"unknown kernel type {kind!r}")

    def to_dict(self):
        out = asdict(self)
        out["values"] = list(self.values)
        out["probs"] = list(self.probs)
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def hash(self):
        return model_hash(self.to_dict())


def gen_iid(box: BoxSpec, indexing, distribution, seed, *path) -> WeightField:
    """I.i.d. weights; ``distribution`` is a list of (value, prob) pairs."""
    values = np.array([float(v) for v, _ in distribution])
    probs = np.array([float(p) for _, p in distribution])
    if values.size == 0 or np.any(values < 0) or np.any(probs < 0):
        raise ValidationError("malformed distribution")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise ValidationError("probabilities must sum to 1")
    shape = box.shape if indexing == "site" else (box.d,) + box.shape
    rng = generator(seed, *path)
    u = rng.random(shape)
    cdf = np.cumsum(probs)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(values) - 1)
    # zero-probability atoms are never drawn, even at cdf plateaus
    idx = np.where(probs[idx] > 0, idx, np.argmax(probs > 0))
    return WeightField(box, indexing, values[idx], {"seed": seed, "path": list(path)})


def _spins(model, nbr, key):
    if model.sampler == "cftp":
        spins, _ = cftp_on_table(nbr, model.beta, model.h, key, CFTP_MAX_LOG2, model.scan)
        return spins
    return gibbs_on_table(nbr, model.beta, model.h, model.sweeps, "random", key, model.scan)


def generate_field(model: ModelSpec, box: BoxSpec, seed=None, *path) -> WeightField:
    """Draw one weight field for ``model`` over ``box``.

    Dependent models are sampled on the torus with the box's extents; the
    returned field keeps the box's own boundary mode so passage times on an
    open box never use wrap-around paths.
    """
    seed = model.seed if seed is None else seed
    if not model.dependent:
        fld = gen_iid(box, model.indexing, list(zip(*model.distribution())), seed, *path)
    else:
        torus = box.with_mode("torus")
        key = derive_key(seed, *path)
        if model.kind == "ising-ab-site":
            fld = spins_to_ab(SpinField(torus, _spins(model, torus.neighbor_table, key)),
                              model.a, model.b)
        elif model.kind == "ising-signchange":
            fld = sign_change_weights(SpinField(torus, _spins(model, torus.neighbor_table, key)))
        elif model.kind == "ising-ab-bond":
            fld = edge_spins_to_ab(torus, _spins(model, cover_neighbor_table(torus), key),
                                   model.a, model.b)
        else:
            kernel = model.build_kernel(box.d)
            nbr = kernel_neighbor_table(kernel, torus)
            w = len(kernel.alphabet)
            if min(kernel.alphabet) < 0:
                raise ValidationError("MRF weights need nonnegative alphabet values")
            state = K.random_init(key, nbr.shape[0], w)
            K.mrf_sweeps(state, nbr, np.cumsum(kernel.flat, axis=1), w, key,
                         np.arange(model.sweeps, dtype=np.int64), model.scan == "random")
            vals = np.asarray(kernel.alphabet)[state]
            shape = box.shape if kernel.mode == "site" else (box.d,) + box.shape
            fld = WeightField(torus, kernel.mode, vals.reshape(shape))
        fld = WeightField(box, fld.indexing, fld.values, dict(fld.meta))
    fld.meta.update({"model_hash": model.hash(), "seed": seed, "path": list(path)})
    if model.dependent and model.sampler == "gibbs":
        fld.meta["burn_in_sweeps"] = model.sweeps
    return fld


@dataclass
class ProbeResult:
    k: int
    replications: int
    undetermined: int
    estimate: float
    ci_low: float
    ci_high: float


def _binomial_ci(x, n, level=0.95):
    ci = stats.binomtest(int(x), int(n)).proportion_ci(confidence_level=level)
    return float(ci.low), float(ci.high)


def determination_probe(model: ModelSpec, torus: BoxSpec, v, k, replications, seed=0):
    """Fraction of replications in which the ``k`` most recent reverse-time
    sweeps do not determine t(v).

    Chains are started from every extremal state at time -k and driven by
    shared update variables; t(v) counts as determined when they agree at v
    (at both endpoints of the edge from v along axis 0 for sign-change
    weights).  Monotone models use the two extreme chains; a non-monotone
    kernel falls back to all initial states, available only on tiny tori.
    The same replication seeds are used for every k, so estimates from one
    seed are nonincreasing in k.
    """
    if torus.mode != "torus":
        raise LatticeError("determination probe needs a torus")
    if k < 0 or replications < 1:
        raise ValueError("need k >= 0 and replications >= 1")
    keys = np.array([derive_key(seed, r) for r in range(replications)], dtype=np.uint64)
    vi = torus.index(v)
    if model.kind in ("ising-ab-site", "ising-signchange"):
        sites = [vi]
        if model.kind == "ising-signchange":
            sites.append(int(torus.neighbor_table[vi, 1]))
        if k == 0:
            count = replications
        else:
            count = K.ising_probe_count(torus.neighbor_table, float(model.beta), float(model.h),
                                        keys, int(k), np.array(sites, dtype=np.int64))
            if count < 0:
                raise AssertionError("monotone sandwich violated")
    elif model.kind == "mrf-hn":
        count = _mrf_probe(model.build_kernel(torus.d), torus, vi, k, keys)
    else:
        raise ProbeUnavailable(f"no update representation for model kind {model.kind!r}")
    lo, hi = _binomial_ci(count, replications)
    return ProbeResult(int(k), int(replications), int(count), count / replications, lo, hi)


def _mrf_probe(kernel, torus, vi, k, keys):
    nbr = kernel_neighbor_table(kernel, torus)
    if kernel.mode != "site":
        raise ProbeUnavailable("probe implemented for site kernels only")
    n, w = nbr.shape[0], len(kernel.alphabet)
    if kernel.is_monotone():
        starts = np.stack([np.zeros(n, dtype=np.int64), np.full(n, w - 1, dtype=np.int64)])
    elif w**n <= TINY_STATE_SPACE:
        starts = np.array(list(itertools.product(range(w), repeat=n)), dtype=np.int64)
    else:
        raise ProbeUnavailable("probe unavailable: non-monotone kernel on a non-tiny torus")
    if k == 0:
        return len(keys) if w > 1 else 0
    cdf = np.cumsum(kernel.flat, axis=1)
    counters = np.arange(k - 1, -1, -1)
    count = 0
    for key in keys:
        states = starts.copy()
        K.mrf_sweeps_many(states, nbr, cdf, w, key, counters, False)
        count += int(np.any(states[:, vi] != states[0, vi]))
    return count


def probe_curve(model, torus, v, ks, replications, seed=0):
    return [determination_probe(model, torus, v, k, replications, seed) for k in ks]
