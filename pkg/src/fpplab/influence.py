"""Exact influence analysis of functions on finite product spaces, and the
averaging function used to randomize passage-time endpoints."""
from dataclasses import dataclass
from fractions import Fraction
import itertools
import math

import numpy as np
from scipy import stats

DEFAULT_CAP = 2**22
TOL = 1e-12


class VacuousCheck(ValueError):
    """The inequality is vacuous (the function does not depend on the coordinate)."""


@dataclass
class FunctionTable:
    """A real function on S^n with i.i.d. coordinates of law ``probs``.

    ``values`` has shape ``(|S|,) * n``; axis i is coordinate i.
    """

    alphabet: tuple
    probs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.alphabet = tuple(self.alphabet)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        s = len(self.alphabet)
        if self.probs.shape != (s,) or np.any(self.probs <= 0):
            raise ValueError("need one positive probability per alphabet symbol")
        if abs(self.probs.sum() - 1.0) > TOL:
            raise ValueError("probabilities must sum to 1")
        if self.values.shape != (s,) * self.values.ndim:
            raise ValueError("values must have shape (|S|,) * n")
        if self.values.size > DEFAULT_CAP:
            raise ValueError(f"|S|^n = {self.values.size} exceeds cap {DEFAULT_CAP}")

    @property
    def n(self):
        return self.values.ndim

    @classmethod
    def from_callable(cls, fn, alphabet, n, probs, cap=DEFAULT_CAP):
        """Tabulate ``fn(point)`` over every point of S^n (points in C order)."""
        alphabet = tuple(alphabet)
        if len(alphabet)**n > cap:
            raise ValueError(f"|S|^n = {len(alphabet)**n} exceeds cap {cap}")
        vals = [fn(pt) for pt in itertools.product(alphabet, repeat=n)]
        return cls(alphabet, probs, np.array(vals, dtype=float).reshape((len(alphabet),) * n))

    def measure(self):
        mu = np.ones(())
        for _ in range(self.n):
            mu = np.multiply.outer(mu, self.probs)
        return mu

    def mean(self):
        return float((self.measure() * self.values).sum())

    def variance(self):
        mu = self.measure()
        m = (mu * self.values).sum()
        return float((mu * (self.values - m) ** 2).sum())


@dataclass
class DeltaTable:
    i: int
    values: np.ndarray
    probs: np.ndarray

    def measure(self):
        mu = np.ones(())
        for _ in range(self.values.ndim):
            mu = np.multiply.outer(mu, self.probs)
        return mu


def conditional_mean(f: FunctionTable, i):
    """Average of f over coordinate i, broadcast back to S^n."""
    avg = np.tensordot(f.values, f.probs, axes=([i], [0]))
    return np.broadcast_to(np.expand_dims(avg, i), f.values.shape)


def delta(f: FunctionTable, i) -> DeltaTable:
    """f minus its conditional expectation over coordinate ``i``."""
    if not 0 <= i < f.n:
        raise IndexError(f"coordinate {i} out of range for n={f.n}")
    return DeltaTable(i, f.values - conditional_mean(f, i), f.probs)


def norms(dt: DeltaTable):
    """(L1, L2) norms with respect to the product measure."""
    mu = dt.measure()
    a = np.abs(dt.values)
    return float((mu * a).sum()), float(math.sqrt((mu * a * a).sum()))


@dataclass
class TalagrandReport:
    variance: float
    influence_sum: float
    log_factor: float
    terms: list
    binary_log_factor: float = None

    @property
    def ratio(self):
        """Var(f) / (log_factor * influence_sum): the smallest admissible K."""
        denom = self.log_factor * self.influence_sum
        return self.variance / denom if denom > 0 else 0.0


def talagrand_functional(f: FunctionTable) -> TalagrandReport:
    """Variance, sum_i ||D_i f||_2^2 / log(e ||D_i f||_2 / ||D_i f||_1), and
    log(1 / min_s p_s).  Coordinates with D_i f == 0 contribute 0.
    For |S| = 2 the two-point factor log(2 / (p(1-p))) is also reported.
    """
    terms = []
    for i in range(f.n):
        l1, l2 = norms(delta(f, i))
        terms.append(0.0 if l1 <= TOL else l2 * l2 / (1.0 + math.log(l2 / l1)))
    bin_factor = None
    if len(f.alphabet) == 2:
        p = f.probs[1]
        bin_factor = math.log(2.0 / (p * (1 - p)))
    return TalagrandReport(f.variance(), float(sum(terms)), math.log(1.0 / f.probs.min()),
                           terms, bin_factor)


def efron_stein_sum(f: FunctionTable):
    return float(sum(norms(delta(f, i))[1] ** 2 for i in range(f.n)))


def efron_stein_check(f: FunctionTable, tol=1e-9) -> bool:
    """Var(f) <= sum_i ||D_i f||_2^2."""
    return f.variance() <= efron_stein_sum(f) + tol


def second_moment_check(dt: DeltaTable, tol=1e-9) -> bool:
    """||D||_2 / ||D||_1 >= 1 / sqrt(P(D != 0))."""
    mu = dt.measure()
    nz = np.abs(dt.values) > TOL
    p_nz = float(mu[nz].sum())
    if p_nz == 0:
        raise VacuousCheck("vacuous: delta vanishes identically")
    l1, l2 = norms(dt)
    return l2 / l1 >= 1.0 / math.sqrt(p_nz) - tol


class AveragingFunction:
    """g_m(x) = m - |(sum x) mod 2m - m| on {0,1}^(m*m).

    A tent map of the bit count: values lie in {0, ..., m} and flipping one
    bit moves the count by one, hence g by at most one.
    """

    def __init__(self, m):
        if m < 1:
            raise ValueError("m must be >= 1")
        self.m = int(m)
        self.n_bits = self.m * self.m

    def from_sum(self, s):
        r = np.mod(s, 2 * self.m)
        return self.m - np.abs(r - self.m)

    def __call__(self, bits):
        bits = np.asarray(bits)
        if bits.shape[-1] != self.n_bits:
            raise ValueError(f"expected {self.n_bits} bits")
        return self.from_sum(bits.sum(axis=-1, dtype=np.int64))


def averaging_function(m) -> AveragingFunction:
    return AveragingFunction(m)


EXACT_M = 64
MAX_M = 4096


def averaging_distribution(m) -> np.ndarray:
    """Law of g_m(y) for y uniform on {0,1}^(m*m), as a vector over {0..m}.

    Exact rational arithmetic for m <= 64; above that the Binomial(m^2, 1/2)
    masses come from scipy in double precision.
    """
    if not 1 <= m <= MAX_M:
        raise ValueError(f"m must be in [1, {MAX_M}]")
    g = AveragingFunction(m)
    n = m * m
    support = np.arange(n + 1)
    idx = g.from_sum(support)
    if m <= EXACT_M:
        counts = [0] * (m + 1)
        c = 1
        for s in range(n + 1):
            counts[idx[s]] += c
            c = c * (n - s) // (s + 1)
        total = 2**n
        return np.array([float(Fraction(k, total)) for k in counts])
    pmf = stats.binom.pmf(support, n, 0.5)
    return np.bincount(idx, weights=pmf, minlength=m + 1)


def passage_function_table(shape=(3, 3), src=None, dst=None, alphabet=(1.0, 2.0),
                           probs=(0.5, 0.5)) -> FunctionTable:
    """f(x) = site passage time from ``src`` to ``dst`` on an open box of
    ``shape`` whose site weights are the coordinates of x (C order)."""
    from .lattice import BoxSpec
    from .passage import passage_time
    from .weights.fields import WeightField

    box = BoxSpec.from_shape(shape)
    src = src if src is not None else box.lower
    dst = dst if dst is not None else box.upper

    def fn(pt):
        return passage_time(WeightField(box, "site", np.reshape(pt, shape)), src, dst).value

    return FunctionTable.from_callable(fn, alphabet, box.size, probs)


def write_function_table(path, f: FunctionTable):
    """Two columns: mixed-radix point index (first coordinate most significant), value."""
    with open(path, "w") as fh:
        fh.write(f"# alphabet={','.join(repr(float(a)) for a in f.alphabet)}\n")
        fh.write(f"# probs={','.join(repr(float(p)) for p in f.probs)}\n")
        fh.write(f"# n={f.n}\n")
        for k, v in enumerate(f.values.ravel()):
            fh.write(f"{k} {float(v)!r}\n")


def read_function_table(path) -> FunctionTable:
    header, rows = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                header[k] = v
            elif line.strip():
                k, v = line.split()
                rows.append((int(k), float(v)))
    alphabet = tuple(float(a) for a in header["alphabet"].split(","))
    probs = [float(p) for p in header["probs"].split(",")]
    n = int(header["n"])
    vals = np.full(len(alphabet)**n, np.nan)
    for k, v in rows:
        vals[k] = v
    if np.isnan(vals).any():
        raise ValueError("function table is missing points")
    return FunctionTable(alphabet, probs, vals.reshape((len(alphabet),) * n))
