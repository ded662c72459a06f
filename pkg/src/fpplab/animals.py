"""Greedy lattice animals: exact and heuristic N(n), and Martin-bound experiments."""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy import integrate

from ._rng import generator
from ._stats import bootstrap_ci
from .lattice import BoxSpec, LatticeError, TooLargeToEnumerate, animal_array, is_connected
from .weights.fields import WeightField
from .weights.models import gen_iid


class DivergentIntegral(ValueError):
    pass


@dataclass
class AnimalScore:
    n: int
    value: float
    witness: frozenset
    exact: bool

    def __post_init__(self):
        d = len(next(iter(self.witness)))
        if len(self.witness) != self.n or (0,) * d not in self.witness \
                or not is_connected(self.witness):
            raise AssertionError(f"invalid lattice animal witness {sorted(self.witness)}")


def _check_field(fld: WeightField):
    if not fld.is_site:
        raise LatticeError("greedy lattice animals need a site field")
    if not fld.box.contains((0,) * fld.box.d):
        raise LatticeError("field box must contain the origin")


def _flat_indices(box: BoxSpec, coords):
    rel = coords - np.asarray(box.lower)
    return np.ravel_multi_index(tuple(np.moveaxis(rel, -1, 0)), box.shape)


def greedy_exact(fld: WeightField, n, cap=None) -> AnimalScore:
    """Exact N(n) by enumerating every animal of size ``n``.

    The box must contain ``[-(n-1), n-1]^d`` so no animal is cut off.  Ties go
    to the first animal in enumeration order.
    """
    _check_field(fld)
    d = fld.box.d
    if not (fld.box.contains((-(n - 1),) * d) and fld.box.contains((n - 1,) * d)):
        raise LatticeError(f"field box must contain [-{n - 1}, {n - 1}]^{d}")
    try:
        animals = animal_array(n, d) if cap is None else animal_array(n, d, cap)
    except TooLargeToEnumerate as exc:
        raise TooLargeToEnumerate(f"{exc}; use greedy_heuristic") from None
    sums = fld.values.ravel()[_flat_indices(fld.box, animals)].sum(axis=1)
    best = int(np.argmax(sums))
    witness = frozenset(tuple(int(c) for c in v) for v in animals[best])
    return AnimalScore(n, float(sums[best]), witness, True)


def _boundary(members, box):
    out = set()
    for v in members:
        for a in range(len(v)):
            for s in (-1, 1):
                w = v[:a] + (v[a] + s,) + v[a + 1:]
                if w not in members and box.contains(w):
                    out.add(w)
    return out


def _grow(fld, n, rng=None, temperature=0.0):
    box = fld.box
    origin = (0,) * box.d
    members = {origin}
    while len(members) < n:
        cand = sorted(_boundary(members, box))
        if not cand:
            raise LatticeError("box too small for an animal of this size")
        w = np.array([fld.site(c) for c in cand])
        if rng is None or temperature <= 0:
            pick = cand[int(np.argmax(w))]
        else:
            logits = (w - w.max()) / temperature
            prob = np.exp(logits)
            pick = cand[int(rng.choice(len(cand), p=prob / prob.sum()))]
        members.add(pick)
    return members


def _score(fld, members):
    return float(sum(fld.site(v) for v in members))


def greedy_heuristic(fld: WeightField, n, strategy="greedy-growth", restarts=64, steps=2000,
                     seed=0, temperature=None) -> AnimalScore:
    """Lower bound on N(n) from a valid witness animal.

    strategies: ``greedy-growth`` (add the heaviest boundary site),
    ``multi-start`` (``restarts`` randomized growths plus the greedy one, best
    kept), ``anneal`` (Metropolis moves from the greedy animal for ``steps``
    steps, best visited animal kept).
    """
    _check_field(fld)
    origin = (0,) * fld.box.d
    best = _grow(fld, n)
    best_val = _score(fld, best)
    rng = generator(seed)
    spread = float(fld.values.std()) or 1.0
    temp = spread if temperature is None else temperature
    if strategy == "greedy-growth":
        pass
    elif strategy == "multi-start":
        for _ in range(restarts):
            cand = _grow(fld, n, rng, temp)
            val = _score(fld, cand)
            if val > best_val:
                best, best_val = cand, val
    elif strategy == "anneal":
        cur, cur_val = set(best), best_val
        for step in range(steps):
            t = temp * (1.0 - step / steps) + 1e-9
            removable = sorted(v for v in cur if v != origin and is_connected(cur - {v}))
            if not removable:
                break
            out = removable[int(rng.integers(len(removable)))]
            rest = cur - {out}
            adds = sorted(w for w in _boundary(rest, fld.box) if w != out)
            if not adds:
                continue
            inn = adds[int(rng.integers(len(adds)))]
            new_val = cur_val - fld.site(out) + fld.site(inn)
            if new_val >= cur_val or rng.random() < math.exp((new_val - cur_val) / t):
                cur, cur_val = rest | {inn}, new_val
                if cur_val > best_val:
                    best, best_val = set(cur), cur_val
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return AnimalScore(n, best_val, frozenset(best), False)


def _finite_atoms(dist):
    try:
        atoms = [(float(v), float(p)) for v, p in dist]
    except (TypeError, ValueError):
        return None
    return atoms


def martin_integral(dist, d, upper=None):
    """Integral over [0, inf) of (1 - F(x))^(1/d).

    ``dist`` is either a list of (value, probability) atoms (computed exactly)
    or an object with ``sf`` (e.g. a frozen scipy distribution), integrated by
    adaptive quadrature to 1e-10 absolute tolerance.  ``upper`` truncates the
    support when it is known to be bounded.
    """
    atoms = _finite_atoms(dist) if not hasattr(dist, "sf") else None
    if atoms is not None:
        atoms = sorted((v, p) for v, p in atoms if p > 0)
        if any(v < 0 for v, _ in atoms):
            raise ValueError("weights must be nonnegative")
        total, prev = 0.0, 0.0
        tail = math.fsum(p for _, p in atoms)
        for v, p in atoms:
            # on [prev, v) the survival function equals the mass at or above v
            total += (v - prev) * max(tail, 0.0) ** (1.0 / d)
            prev = v
            tail -= p
        return total

    def integrand(x):
        return float(dist.sf(x)) ** (1.0 / d)

    hi = upper
    if hi is None and hasattr(dist, "support"):
        hi = float(dist.support()[1])
    if hi is None or not math.isfinite(hi):
        r = [x * integrand(x) for x in (1e6, 1e9, 1e12)]
        if r[2] > 1e-12 and r[2] >= 0.5 * r[1] and r[1] >= 0.5 * r[0]:
            raise DivergentIntegral("divergent integral: (1-F)^(1/d) decays no faster than 1/x")
        hi = np.inf
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(integrand, 0.0, hi, epsabs=1e-10, epsrel=1e-10, limit=500)
        except integrate.IntegrationWarning as exc:
            raise DivergentIntegral(f"quadrature did not converge: {exc}") from None
    if not math.isfinite(val):
        raise DivergentIntegral("divergent integral")
    return val


@dataclass
class MartinRow:
    n: int
    replications: int
    mean_ratio: float
    ci_low: float
    ci_high: float
    integral: float
    exact: bool

    @property
    def normalized(self):
        """E[N(n)/n] divided by the integral."""
        return self.mean_ratio / self.integral if self.integral > 0 else math.inf


def martin_ratio_experiment(dist, d, n_list, replications, seed=0, heuristic="multi-start"):
    """Monte Carlo E[N(n)/n] with bootstrap CIs next to the Martin integral.

    One i.i.d. field on ``[-(n_max-1), n_max-1]^d`` per replication serves
    every n, so N(n) is nondecreasing in n within a replication.  Returns
    (rows, per-replication N values as an array [rep, len(n_list)]).
    """
    n_list = sorted(int(n) for n in n_list)
    nmax = n_list[-1]
    box = BoxSpec.cube(nmax - 1, d)
    integral = martin_integral(dist, d)
    atoms = _finite_atoms(dist) if not hasattr(dist, "sf") else None
    exact = {}
    for n in n_list:
        try:
            animal_array(n, d)
            exact[n] = True
        except TooLargeToEnumerate:
            exact[n] = False
    values = np.empty((replications, len(n_list)))
    for r in range(replications):
        if atoms is not None:
            fld = gen_iid(box, "site", atoms, seed, r)
        else:
            vals = dist.rvs(size=box.shape, random_state=generator(seed, r))
            fld = WeightField(box, "site", vals)
        for j, n in enumerate(n_list):
            sc = greedy_exact(fld, n) if exact[n] else greedy_heuristic(fld, n, heuristic, seed=r)
            values[r, j] = sc.value
    rows = []
    rng = generator(seed, 1 << 30)
    for j, n in enumerate(n_list):
        ratio = values[:, j] / n
        lo, hi = bootstrap_ci(ratio, np.mean, rng) if replications > 1 else (ratio[0], ratio[0])
        rows.append(MartinRow(n, replications, float(ratio.mean()), lo, hi, integral, exact[n]))
    return rows, values
