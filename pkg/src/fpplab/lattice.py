"""Lattice geometry on Z^d: boxes, tori, adjacency and lattice animals."""
from dataclasses import dataclass
from functools import cached_property, lru_cache
import math
from typing import Iterator, NamedTuple

import numpy as np

COORD_LIMIT = 2**62

# Growth constants for fixed lattice animals (site animals on Z^d).
_GROWTH = {2: 4.0626, 3: 8.3479}
DEFAULT_ANIMAL_CAP = 2_000_000


class LatticeError(ValueError):
    """Vertex or box outside the domain of an operation."""


class TooLargeToEnumerate(LatticeError):
    pass


def as_vertex(v) -> tuple:
    try:
        out = tuple(int(c) for c in v)
    except TypeError:
        raise LatticeError(f"not a vertex: {v!r}") from None
    if any(int(c) != c for c in v):
        raise LatticeError(f"non-integer coordinates: {v!r}")
    if any(abs(c) >= COORD_LIMIT for c in out):
        raise OverflowError(f"coordinate out of range: {v!r}")
    return out


def l1_norm(v) -> int:
    v = as_vertex(v)
    s = sum(abs(c) for c in v)
    if s >= COORD_LIMIT:
        raise OverflowError(f"|v| overflows for {v!r}")
    return s


def distance(v, w) -> int:
    v, w = as_vertex(v), as_vertex(w)
    if len(v) != len(w):
        raise LatticeError("dimension mismatch")
    return l1_norm(tuple(a - b for a, b in zip(v, w)))


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned box ``[lower, upper]`` (inclusive) in Z^d.

    ``mode`` is ``"open"`` (no wrap) or ``"torus"`` (periodic in every axis).
    """

    lower: tuple
    upper: tuple
    mode: str = "open"

    def __post_init__(self):
        lo, hi = as_vertex(self.lower), as_vertex(self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi):
            raise LatticeError("lower/upper dimension mismatch")
        if len(lo) < 2:
            raise LatticeError("dimension must be >= 2")
        if any(h < l for l, h in zip(lo, hi)):
            raise LatticeError(f"empty box {lo}..{hi}")
        if self.mode not in ("open", "torus"):
            raise LatticeError(f"unknown boundary mode {self.mode!r}")
        if self.mode == "torus" and any(h - l + 1 < 2 for l, h in zip(lo, hi)):
            raise LatticeError("torus sides must be >= 2")

    @classmethod
    def from_shape(cls, shape, mode="open", origin=None):
        """Box with the given side lengths, lower corner at ``origin`` (default 0)."""
        origin = tuple(origin) if origin is not None else (0,) * len(shape)
        return cls(origin, tuple(o + s - 1 for o, s in zip(origin, shape)), mode)

    @classmethod
    def cube(cls, m, d, center=None, mode="open"):
        """``center + [-m, m]^d``."""
        c = tuple(center) if center is not None else (0,) * d
        return cls(tuple(x - m for x in c), tuple(x + m for x in c), mode)

    @property
    def d(self) -> int:
        return len(self.lower)

    @property
    def shape(self) -> tuple:
        return tuple(h - l + 1 for l, h in zip(self.lower, self.upper))

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def with_mode(self, mode):
        return BoxSpec(self.lower, self.upper, mode)

    def contains(self, v) -> bool:
        v = as_vertex(v)
        return len(v) == self.d and all(
            l <= c <= h for c, l, h in zip(v, self.lower, self.upper))

    def _check(self, v):
        v = as_vertex(v)
        if not self.contains(v):
            raise LatticeError(f"vertex {v} outside box {self.lower}..{self.upper}")
        return v

    def index(self, v) -> int:
        """Flat C-order index; lexicographic order of vertices is index order."""
        v = self._check(v)
        return int(np.ravel_multi_index(
            tuple(c - l for c, l in zip(v, self.lower)), self.shape))

    def vertex(self, idx) -> tuple:
        loc = np.unravel_index(int(idx), self.shape)
        return tuple(int(c) + l for c, l in zip(loc, self.lower))

    def vertices(self) -> Iterator[tuple]:
        for idx in range(self.size):
            yield self.vertex(idx)

    def on_face(self, v) -> bool:
        """True if ``v`` lies on the boundary face of an open box."""
        if self.mode == "torus":
            return False
        v = as_vertex(v)
        return any(c == l or c == h for c, l, h in zip(v, self.lower, self.upper))

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """(size, 2d) int64 table of flat neighbor indices, -1 where absent.

        Column ``2a`` is the ``-e_a`` neighbor and ``2a+1`` the ``+e_a`` one.
        """
        shape = self.shape
        idx = np.arange(self.size).reshape(shape)
        table = np.full((self.size, 2 * self.d), -1, dtype=np.int64)
        for a in range(self.d):
            for col, shift in ((2 * a, 1), (2 * a + 1, -1)):
                nb = np.roll(idx, shift, axis=a)
                if self.mode == "open":
                    nb = nb.copy()
                    edge = [slice(None)] * self.d
                    edge[a] = 0 if shift == 1 else shape[a] - 1
                    nb[tuple(edge)] = -1
                table[:, col] = nb.ravel()
        table.setflags(write=False)
        return table


def neighbors(v, box: BoxSpec) -> list:
    """Nearest neighbors of ``v`` in ``box`` in the order -e_0, +e_0, -e_1, ...

    In torus mode the result always has 2d entries (a side of length 2 gives
    the same vertex twice).
    """
    v = box._check(v)
    out = []
    for a in range(box.d):
        for step in (-1, 1):
            w = list(v)
            w[a] += step
            if box.mode == "torus":
                side = box.upper[a] - box.lower[a] + 1
                w[a] = box.lower[a] + (w[a] - box.lower[a]) % side
            elif not box.lower[a] <= w[a] <= box.upper[a]:
                continue
            out.append(tuple(w))
    return out


class Edge(NamedTuple):
    """Edge from ``tail`` to ``tail + e_axis`` (wrapped in torus mode)."""

    tail: tuple
    axis: int

    def head(self, box: BoxSpec) -> tuple:
        w = list(self.tail)
        w[self.axis] += 1
        if box.mode == "torus":
            side = box.shape[self.axis]
            w[self.axis] = box.lower[self.axis] + (w[self.axis] - box.lower[self.axis]) % side
        return tuple(w)


def edge_between(u, w, box: BoxSpec) -> Edge:
    """Canonical :class:`Edge` joining adjacent vertices ``u`` and ``w``."""
    u, w = box._check(u), box._check(w)
    for a in range(box.d):
        for tail, head in ((u, w), (w, u)):
            e = Edge(tail, a)
            if (box.mode == "open" and tail[a] == box.upper[a]):
                continue
            if e.head(box) == head:
                return e
    raise LatticeError(f"{u} and {w} are not adjacent")


def edges(box: BoxSpec) -> Iterator[Edge]:
    for v in box.vertices():
        for a in range(box.d):
            if box.mode == "open" and v[a] == box.upper[a]:
                continue
            yield Edge(v, a)


class UnionFind:
    """Disjoint sets over ``range(n)`` with path halving and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a):
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def connected(self, a, b):
        return self.find(a) == self.find(b)


def is_connected(vertices) -> bool:
    """Nearest-neighbor connectivity of a finite vertex set (union-find)."""
    verts = [as_vertex(v) for v in vertices]
    if not verts:
        return False
    pos = {v: i for i, v in enumerate(verts)}
    uf = UnionFind(len(verts))
    for v, i in pos.items():
        for a in range(len(v)):
            w = list(v)
            w[a] += 1
            j = pos.get(tuple(w))
            if j is not None:
                uf.union(i, j)
    root = uf.find(0)
    return all(uf.find(i) == root for i in range(len(verts)))


def animal_count_estimate(n, d) -> float:
    """Rough count of origin-containing animals of size ``n`` in Z^d."""
    lam = _GROWTH.get(d, 2 * d * math.e - 3 * math.e)
    return max(1.0, 0.32 * lam**n)


@lru_cache(maxsize=32)
def _animal_codes(n, d):
    # Vertices are encoded on a (2n-1)^d grid centred on the origin.
    side = 2 * n - 1
    strides = [side**(d - 1 - a) for a in range(d)]
    origin = sum((n - 1) * s for s in strides)
    steps = [s for s in strides] + [-s for s in strides]
    level = {(origin,)}
    for _ in range(n - 1):
        nxt = set()
        for animal in level:
            members = set(animal)
            for c in animal:
                for s in steps:
                    w = c + s
                    if w in members:
                        continue
                    # every neighbor step stays inside the grid: extent <= n-1
                    nxt.add(tuple(sorted(members | {w})))
        level = nxt
    codes = np.array(sorted(level), dtype=np.int64).reshape(len(level), n)
    coords = np.stack(np.unravel_index(codes, (side,) * d), axis=-1) - (n - 1)
    coords.setflags(write=False)
    return coords


def animal_array(n, d=2, cap=DEFAULT_ANIMAL_CAP) -> np.ndarray:
    """All origin-containing animals of size ``n`` as an (count, n, d) array.

    Rows are sorted lexicographically by their encoded vertex lists.
    """
    if n < 1:
        raise LatticeError("animal size must be >= 1")
    if d < 2:
        raise LatticeError("dimension must be >= 2")
    est = animal_count_estimate(n, d)
    if est > cap:
        raise TooLargeToEnumerate(
            f"too large to enumerate: ~{est:.3g} animals of size {n} in d={d} (cap {cap})")
    return _animal_codes(n, d)


def enumerate_animals(n, d=2, cap=DEFAULT_ANIMAL_CAP) -> Iterator[frozenset]:
    """Yield every lattice animal of size ``n`` containing the origin once."""
    for row in animal_array(n, d, cap):
        yield frozenset(tuple(int(c) for c in v) for v in row)
