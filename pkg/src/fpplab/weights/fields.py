"""Weight and spin fields over a box, plus their text grid format."""
from dataclasses import dataclass, field
import hashlib
import json

import numpy as np

from ..lattice import BoxSpec, LatticeError, as_vertex, edge_between


class ValidationError(ValueError):
    pass


@dataclass
class WeightField:
    """Nonnegative weights indexed by sites or bonds of ``box``.

    Site values have shape ``box.shape``.  Bond values have shape
    ``(d,) + box.shape``; ``values[a][x]`` is the weight of the edge from x to
    x + e_a.  In open mode the slice ``x_a == upper_a`` has no edge and is
    ignored.
    """

    box: BoxSpec
    indexing: str
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.indexing not in ("site", "bond"):
            raise ValidationError(f"indexing must be 'site' or 'bond', got {self.indexing!r}")
        vals = np.asarray(self.values, dtype=np.float64)
        want = self.box.shape if self.indexing == "site" else (self.box.d,) + self.box.shape
        if vals.shape != want:
            raise ValidationError(f"values shape {vals.shape} != {want}")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValidationError("weights must be finite and nonnegative")
        self.values = vals

    @property
    def is_site(self):
        return self.indexing == "site"

    def as_open(self):
        """Same weights, paths no longer allowed to wrap."""
        return WeightField(self.box.with_mode("open"), self.indexing, self.values, dict(self.meta))

    def site(self, v) -> float:
        if not self.is_site:
            raise ValidationError("bond field has no site weights")
        return float(self.values.flat[self.box.index(v)])

    def bond(self, u, w) -> float:
        if self.is_site:
            raise ValidationError("site field has no bond weights")
        e = edge_between(u, w, self.box)
        loc = tuple(c - l for c, l in zip(e.tail, self.box.lower))
        return float(self.values[(e.axis,) + loc])

    def path_weight(self, path) -> float:
        """Passage time of a vertex sequence under this field."""
        path = [as_vertex(v) for v in path]
        if self.is_site:
            return float(sum(self.site(v) for v in path))
        return float(sum(self.bond(u, w) for u, w in zip(path, path[1:])))

    def step_table(self) -> np.ndarray:
        """(size, 2d) weights of each neighbor step, matching ``box.neighbor_table``.

        For a site field the step weight is the weight of the destination.
        """
        nbr = self.box.neighbor_table
        if self.is_site:
            flat = self.values.ravel()
            out = np.where(nbr >= 0, flat[np.maximum(nbr, 0)], np.inf)
            return out
        d = self.box.d
        out = np.full(nbr.shape, np.inf)
        for a in range(d):
            fwd = self.values[a].ravel()
            out[:, 2 * a + 1] = fwd
            # backward step across the edge whose tail is the -e_a neighbor
            out[:, 2 * a] = np.roll(self.values[a], 1, axis=a).ravel()
        out[nbr < 0] = np.inf
        return out


@dataclass
class SpinField:
    """±1 configuration over a torus."""

    box: BoxSpec
    spins: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.box.mode != "torus":
            raise LatticeError("spin fields live on a torus")
        s = np.asarray(self.spins).astype(np.int8).reshape(self.box.shape)
        if not np.all((s == 1) | (s == -1)):
            raise ValidationError("spins must be -1 or +1")
        self.spins = s

    def at(self, v) -> int:
        return int(self.spins.flat[self.box.index(v)])


def model_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _fmt(x) -> str:
    return repr(float(x))


def write_grid(path, fld, seed=None, model=None):
    """Write a :class:`WeightField` or :class:`SpinField` as a text grid.

    Layout: ``#`` header lines of ``key=value`` then one value per line in C
    order (bond fields: axis-major).
    """
    if isinstance(fld, SpinField):
        kind, indexing, vals = "spin", "site", fld.spins.ravel()
    else:
        kind, indexing, vals = "weight", fld.indexing, fld.values.ravel()
    box = fld.box
    header = {
        "kind": kind,
        "dimension": box.d,
        "lower": ",".join(map(str, box.lower)),
        "upper": ",".join(map(str, box.upper)),
        "mode": box.mode,
        "indexing": indexing,
        "model_hash": model_hash(model) if model is not None else fld.meta.get("model_hash", "none"),
        "seed": seed if seed is not None else fld.meta.get("seed", "none"),
    }
    lines = [f"# {k}={v}" for k, v in header.items()]
    if kind == "spin":
        lines += [str(int(x)) for x in vals]
    else:
        lines += [_fmt(x) for x in vals]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid(path):
    header, data = {}, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                header[k] = v
            else:
                data.append(float(line))
    lower = tuple(int(c) for c in header["lower"].split(","))
    upper = tuple(int(c) for c in header["upper"].split(","))
    box = BoxSpec(lower, upper, header["mode"])
    meta = {"model_hash": header.get("model_hash"), "seed": header.get("seed")}
    arr = np.array(data)
    if header["kind"] == "spin":
        return SpinField(box, arr.astype(np.int8), meta)
    shape = box.shape if header["indexing"] == "site" else (box.d,) + box.shape
    return WeightField(box, header["indexing"], arr.reshape(shape), meta)
