"""Monte Carlo drivers: variance scans, the shift-invariance test, the
sign-change connectivity check and optimal-path length statistics."""
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import asdict, dataclass, field
import json
import math

import numpy as np
from scipy import stats

from ._rng import derive_key, generator
from ._stats import binomial_ci, bootstrap_ci, unbiased_var
from .lattice import BoxSpec, UnionFind, as_vertex, l1_norm
from .passage import (BoundUnavailable, ShiftSpec, averaging_m, geodesic_bound, passage_time,
                      shifted_passage)
from .weights.fields import SpinField, model_hash
from .weights.ising import CFTP_MAX_LOG2, cftp_on_table, gibbs_on_table, sign_change_weights
from .weights.models import ModelSpec, generate_field

# replication stream tags
_F, _FT, _SHIFT, _BOOT = 0, 1, 2, 3

SCAN_COLUMNS = ("v", "replications", "mean", "variance", "var_ci_low", "var_ci_high",
                "var_over_v", "var_log_v_over_v", "boundary_touch_fraction",
                "geodesic_bound_violations")


@dataclass
class ExperimentSpec:
    model: ModelSpec
    sizes: tuple = (16, 32, 64, 128, 256)
    replications: int = 400
    seed: int = 0
    direction: tuple = (1, 0)
    margin_factor: float = 1.5
    boundary_threshold: float = 0.001
    n_boot: int = 2000
    workers: int = 1
    same_seed: bool = False

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.direction = as_vertex(self.direction)
        if any(s < 2 for s in self.sizes):
            raise ValueError("|v| must be >= 2 so that log|v| > 0")
        if self.replications < 2:
            raise ValueError("need at least 2 replications")
        if self.margin_factor < 1:
            raise ValueError("margin factor must be >= 1")
        if l1_norm(self.direction) == 0:
            raise ValueError("direction must be nonzero")

    @property
    def d(self):
        return len(self.direction)

    def target(self, size):
        """Lattice point of L1 norm ``size`` along ``direction``."""
        dnorm = l1_norm(self.direction)
        v = [size * c // dnorm for c in self.direction]
        # distribute rounding loss on the first nonzero axis
        short = size - l1_norm(v)
        i = next(j for j, c in enumerate(self.direction) if c)
        v[i] += short if self.direction[i] > 0 else -short
        return tuple(v)

    def to_dict(self):
        out = asdict(self)
        out["model"] = self.model.to_dict()
        out["sizes"] = list(self.sizes)
        out["direction"] = list(self.direction)
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["model"] = ModelSpec.from_dict(data["model"])
        return cls(**data)

    def hash(self):
        """Hash of everything that affects results (the worker count does not)."""
        d = self.to_dict()
        d.pop("workers")
        return model_hash(d)


def box_for(v, margin_factor=1.5, extra=0):
    """Open box around the endpoints 0 and v (and their shifts by up to
    ``extra`` in every positive axis) with margin ceil(margin_factor |v| / 2)
    on every side."""
    v = as_vertex(v)
    margin = math.ceil(margin_factor * l1_norm(v) / 2)
    lo = tuple(min(0, c) - margin for c in v)
    hi = tuple(max(0, c) + extra + margin for c in v)
    return BoxSpec(lo, hi, "open")


def model_bounds(model: ModelSpec):
    """(a, b) with all weights in [a, b], or None when unknown."""
    if model.kind in ("iid-two-valued", "ising-ab-site", "ising-ab-bond"):
        return model.a, model.b
    if model.kind == "iid-general":
        vals = [v for v, p in zip(model.values, model.probs) if p > 0]
        return min(vals), max(vals)
    if model.kind == "ising-signchange":
        return 0.0, 1.0
    if model.kind == "mrf-hn":
        alph = model.build_kernel(2).alphabet if model.kernel else ()
        return (min(alph), max(alph)) if alph else None
    return None


@dataclass
class ScanRow:
    v: int
    replications: int
    mean: float
    variance: float
    var_ci_low: float
    var_ci_high: float
    var_over_v: float
    var_log_v_over_v: float
    boundary_touch_fraction: float
    geodesic_bound_violations: int

    def ratio_ci(self):
        return self.var_ci_low / self.v, self.var_ci_high / self.v


@dataclass
class ScanResult:
    rows: list
    records: list
    valid: bool
    diagnostics: list = field(default_factory=list)


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _replicate(spec: ExperimentSpec, size, r, bound):
    v = spec.target(size)
    box = box_for(v, spec.margin_factor)
    rep = 0 if spec.same_seed else r
    fld = generate_field(spec.model, box, spec.seed, size, _F, rep)
    res = passage_time(fld, (0,) * spec.d, v)
    rec = {"v": size, "rep": r, "value": res.value, "edge_count": res.edge_count,
           "touched_boundary": res.touched_boundary}
    if bound is not None:
        rec["bound_ok"] = res.edge_count <= bound + 1e-9
    return rec


def variance_scan(spec: ExperimentSpec) -> ScanResult:
    """Var(T(0, v)) across |v| with bootstrap CIs.

    Each replication draws a fresh field from its own derived stream, keyed by
    (seed, |v|, replication), so rows are independent of the size list order
    and of the worker count.
    """
    bounds = model_bounds(spec.model)
    rows, records, diags = [], [], []
    valid = True
    for size in spec.sizes:
        try:
            bound = geodesic_bound(size, *bounds, spec.model.indexing) if bounds else None
        except BoundUnavailable:
            bound = None
        recs = _map(lambda r: _replicate(spec, size, r, bound), range(spec.replications),
                    spec.workers)
        recs.sort(key=lambda rec: rec["rep"])
        vals = np.array([rec["value"] for rec in recs])
        var = float(unbiased_var(vals))
        lo, hi = bootstrap_ci(vals, unbiased_var, generator(spec.seed, size, _BOOT),
                              n_resamples=spec.n_boot)
        touch = float(np.mean([rec["touched_boundary"] for rec in recs]))
        viol = sum(1 for rec in recs if rec.get("bound_ok") is False) if bound is not None else -1
        if touch > spec.boundary_threshold:
            valid = False
            diags.append(f"|v|={size}: boundary-touch fraction {touch:.4g} exceeds "
                         f"{spec.boundary_threshold}")
        rows.append(ScanRow(size, spec.replications, float(vals.mean()), var, lo, hi,
                            var / size, var * math.log(size) / size, touch, viol))
        records.extend(recs)
    return ScanResult(rows, records, valid, diags)


def nonincreasing_within_ci(rows):
    """For consecutive rows: Var/|v| does not increase, or the CIs overlap."""
    out = []
    for prev, cur in zip(rows, rows[1:]):
        plo, phi = prev.ratio_ci()
        clo, chi = cur.ratio_ci()
        out.append(cur.var_over_v <= prev.var_over_v or (clo <= phi and plo <= chi))
    return out


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_scan_csv(path, result: ScanResult, spec: ExperimentSpec):
    with open(path, "w", newline="") as fh:
        fh.write(f"# spec_hash={spec.hash()}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_COLUMNS)
        for row in result.rows:
            w.writerow([_fmt(getattr(row, c)) for c in SCAN_COLUMNS])


def read_scan_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = []
    for rec in csv.DictReader(lines):
        rows.append(ScanRow(int(rec["v"]), int(rec["replications"]), float(rec["mean"]),
                            float(rec["variance"]), float(rec["var_ci_low"]),
                            float(rec["var_ci_high"]), float(rec["var_over_v"]),
                            float(rec["var_log_v_over_v"]), float(rec["boundary_touch_fraction"]),
                            int(rec["geodesic_bound_violations"])))
    return rows


def write_records_jsonl(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


@dataclass
class ShiftReport:
    v: int
    m: int
    samples: int
    ks_statistic: float
    ks_pvalue: float
    var_f: float
    var_shifted: float
    var_diff: float
    diff_ci_low: float
    diff_ci_high: float

    @property
    def diff_ci_contains_zero(self):
        return self.diff_ci_low <= 0.0 <= self.diff_ci_high


def shift_invariance_test(spec: ExperimentSpec, size, samples) -> ShiftReport:
    """Compare f = T(0, v) with f~ = T(z(Y), v + z(Y)) on independent fields."""
    v = spec.target(size)
    m = averaging_m(v)
    box = box_for(v, spec.margin_factor, extra=m)
    origin = (0,) * spec.d

    def one(r):
        fa = generate_field(spec.model, box, spec.seed, size, _F, r)
        fb = generate_field(spec.model, box, spec.seed, size, _FT, r)
        shift = ShiftSpec.draw(v, generator(spec.seed, size, _SHIFT, r))
        return passage_time(fa, origin, v).value, shifted_passage(fb, v, shift).value

    pairs = _map(one, range(samples), spec.workers)
    f = np.array([p[0] for p in pairs])
    ft = np.array([p[1] for p in pairs])
    if np.ptp(f) == 0 and np.ptp(ft) == 0 and f[0] == ft[0]:
        ks, pval = 0.0, 1.0
    else:
        res = stats.ks_2samp(f, ft)
        ks, pval = float(res.statistic), float(res.pvalue)
    rng = generator(spec.seed, size, _BOOT)
    idx_a = rng.integers(0, samples, size=(spec.n_boot, samples))
    idx_b = rng.integers(0, samples, size=(spec.n_boot, samples))
    diffs = unbiased_var(f[idx_a], axis=1) - unbiased_var(ft[idx_b], axis=1)
    diff = float(unbiased_var(f) - unbiased_var(ft))
    lo, hi = np.percentile(diffs, [2.5, 97.5])
    return ShiftReport(size, m, samples, ks, pval, float(unbiased_var(f)), float(unbiased_var(ft)),
                       diff, float(min(lo, diff)), float(max(hi, diff)))


def generate_spins(model: ModelSpec, box: BoxSpec, seed, *path) -> SpinField:
    """Site spins on the torus over ``box``, from the same stream that
    :func:`generate_field` uses for sign-change weights."""
    torus = box.with_mode("torus")
    key = derive_key(seed, *path)
    if model.sampler == "cftp":
        spins, _ = cftp_on_table(torus.neighbor_table, model.beta, model.h, key, CFTP_MAX_LOG2,
                                 model.scan)
    else:
        spins = gibbs_on_table(torus.neighbor_table, model.beta, model.h, model.sweeps, "random",
                               key, model.scan)
    return SpinField(torus, spins)


def same_sign_connected(spins: SpinField, u, w):
    """Union-find over monochromatic edges that do not wrap around the box."""
    box = spins.box.with_mode("open")
    s = spins.spins.ravel()
    nbr = box.neighbor_table
    uf = UnionFind(box.size)
    for x in range(box.size):
        for c in range(1, nbr.shape[1], 2):
            y = nbr[x, c]
            if y >= 0 and s[x] == s[y]:
                uf.union(x, int(y))
    return uf.connected(box.index(u), box.index(w))


@dataclass
class ConnectivityReport:
    samples: int
    agreements: int
    zero_passage: int

    @property
    def agreement(self):
        return self.agreements / self.samples


def signchange_connectivity_check(model: ModelSpec, size, samples, seed=0, margin_factor=1.5,
                                  direction=(1, 0), workers=1) -> ConnectivityReport:
    """(T(0, v) == 0) versus same-sign connectivity of 0 and v, per sample."""
    if model.kind != "ising-signchange":
        raise ValueError("connectivity check needs the sign-change model")
    spec = ExperimentSpec(model, (size,), 2, seed, direction, margin_factor)
    v = spec.target(size)
    box = box_for(v, margin_factor)
    origin = (0,) * len(v)

    def one(r):
        spins = generate_spins(model, box, seed, size, _F, r)
        fld = sign_change_weights(spins).as_open()
        zero = passage_time(fld, origin, v).value == 0.0
        return zero, zero == same_sign_connected(spins, origin, v)

    out = _map(one, range(samples), workers)
    return ConnectivityReport(samples, sum(a for _, a in out), sum(z for z, _ in out))


@dataclass
class PathLengthRow:
    v: int
    samples: int
    c1: float
    exceed: int
    fraction: float
    ci_low: float
    ci_high: float


def path_length_statistics(spec: ExperimentSpec, sizes, samples, c1):
    """Fraction of samples where no optimal path from 0 to v has at most
    c1 |v| vertices (the geodesic returned has the fewest edges among optimal
    paths, so its vertex count decides this)."""
    rows = []
    for size in sizes:
        v = spec.target(size)
        box = box_for(v, spec.margin_factor)

        def one(r):
            fld = generate_field(spec.model, box, spec.seed, size, _F, r)
            return passage_time(fld, (0,) * spec.d, v).vertex_count

        counts = _map(one, range(samples), spec.workers)
        exceed = sum(1 for c in counts if c > c1 * size)
        lo, hi = binomial_ci(exceed, samples)
        rows.append(PathLengthRow(size, samples, c1, exceed, exceed / samples, lo, hi))
    return rows
