"""Exact passage times, geodesics, hop-constrained passage times and the
randomly shifted passage time.

Site version: T(pi) sums the weights of every vertex of pi, both endpoints
included, so T(v, v) = t(v).  Bond version: T(pi) sums over the edges.

Geodesic selection: among optimal paths, the ones with fewest edges are kept
and the lexicographically smallest vertex sequence is returned.  Equality of
path costs is exact floating-point equality of the accumulated sums.
"""
from dataclasses import dataclass, field
import heapq
import math

import numpy as np
from numba import njit

from .lattice import BoxSpec, LatticeError, as_vertex, distance, l1_norm
from .weights.fields import WeightField


class InfeasibleError(ValueError):
    """No path satisfies the hop budget."""


class BoundUnavailable(ValueError):
    """Geodesic length bound needs weights bounded away from zero."""


@dataclass
class PassageResult:
    value: float
    geodesic: list
    edge_count: int
    touched_boundary: bool
    src: tuple = None
    dst: tuple = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def vertex_count(self):
        return self.edge_count + 1


@njit(cache=True, nogil=True)
def _labels(nbr, step, start_cost, dst, stop_at):
    """Label-setting search from ``dst`` with lexicographic (cost, hops) keys.

    Returns cost-to-dst and fewest-hops-among-optimal arrays.  When
    ``stop_at >= 0`` the search stops once every vertex with cost <= the
    cost of ``stop_at`` is settled; other entries stay at inf / -1.
    """
    n, k = nbr.shape
    dist = np.full(n, np.inf)
    hops = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    dist[dst] = start_cost
    hops[dst] = 0
    heap = [(start_cost, np.int64(0), np.int64(dst))]
    limit = np.inf
    while heap:
        d, hp, u = heapq.heappop(heap)
        if done[u]:
            continue
        if d > limit:
            break
        done[u] = True
        if u == stop_at:
            limit = d
        for c in range(k):
            x = nbr[u, c]
            if x < 0 or done[x]:
                continue
            # site: entering x costs t(x) = step[u, c]; bond: same edge either way
            nd = step[u, c] + d
            nh = hp + 1
            if nd < dist[x] or (nd == dist[x] and nh < hops[x]):
                dist[x] = nd
                hops[x] = nh
                heapq.heappush(heap, (nd, nh, x))
    for u in range(n):
        if not done[u]:
            dist[u] = np.inf
            hops[u] = -1
    return dist, hops


@njit(cache=True, nogil=True)
def _extract(nbr, step, own, site, dist, hops, src, dst):
    path = np.empty(hops[src] + 1, dtype=np.int64)
    cur = src
    path[0] = cur
    j = 1
    while cur != dst:
        best = -1
        for c in range(nbr.shape[1]):
            u = nbr[cur, c]
            if u < 0 or hops[u] != hops[cur] - 1:
                continue
            cost = own[cur] if site else step[cur, c]
            if cost + dist[u] == dist[cur] and (best < 0 or u < best):
                best = u
        if best < 0:
            return path[:0]
        cur = best
        path[j] = cur
        j += 1
    return path


def _prepare(fld: WeightField):
    nbr = fld.box.neighbor_table
    step = fld.step_table()
    own = fld.values.ravel() if fld.is_site else np.zeros(fld.box.size)
    return nbr, step, own


def distance_map(fld: WeightField, dst):
    """Full cost-to-``dst`` and fewest-hop arrays (shape ``box.shape``)."""
    dst = as_vertex(dst)
    di = fld.box.index(dst)
    nbr, step, own = _prepare(fld)
    start = float(own[di]) if fld.is_site else 0.0
    dist, hops = _labels(nbr, step, start, di, -1)
    return dist.reshape(fld.box.shape), hops.reshape(fld.box.shape)


def passage_time(fld: WeightField, src, dst) -> PassageResult:
    """Exact passage time from ``src`` to ``dst`` with a deterministic geodesic."""
    box = fld.box
    src, dst = as_vertex(src), as_vertex(dst)
    si, di = box.index(src), box.index(dst)
    nbr, step, own = _prepare(fld)
    start = float(own[di]) if fld.is_site else 0.0
    dist, hops = _labels(nbr, step, start, di, si)
    if not np.isfinite(dist[si]):
        raise LatticeError(f"{dst} unreachable from {src}")
    idx = _extract(nbr, step, own, fld.is_site, dist, hops, si, di)
    if idx.size == 0:
        raise RuntimeError("geodesic extraction failed")
    geo = [box.vertex(i) for i in idx]
    touched = box.mode == "open" and any(box.on_face(v) for v in geo)
    return PassageResult(float(dist[si]), geo, len(geo) - 1, touched, src, dst,
                         {"min_optimal_edges": int(hops[si])})


def hop_budget(c1, src, dst):
    """Maximum number of vertices allowed: ceil(c1 * |src - dst|)."""
    if c1 <= 0:
        raise ValueError("c1 must be > 0")
    return math.ceil(c1 * distance(src, dst) - 1e-12)


def passage_time_hop_constrained(fld: WeightField, src, dst, c1) -> PassageResult:
    """Minimum of T(pi) over paths with at most ceil(c1 |src - dst|) vertices.

    Label-setting over (vertex, vertices used) with Pareto pruning: a label
    is discarded once its vertex was settled with no more vertices used.
    """
    box = fld.box
    src, dst = as_vertex(src), as_vertex(dst)
    si, di = box.index(src), box.index(dst)
    budget = hop_budget(c1, src, dst)
    need = distance(src, dst) + 1
    if budget < need:
        raise InfeasibleError(f"hop budget {budget} vertices < {need} needed")
    nbr, step, own = _prepare(fld)
    start = float(own[si]) if fld.is_site else 0.0
    best_used = np.full(box.size, np.iinfo(np.int64).max)
    parents = [-1]
    nodes = [si]
    heap = [(start, 1, si, 0)]
    while heap:
        cost, used, u, lab = heapq.heappop(heap)
        if used >= best_used[u]:
            continue
        best_used[u] = used
        if u == di:
            path = []
            while lab >= 0:
                path.append(box.vertex(nodes[lab]))
                lab = parents[lab]
            path.reverse()
            touched = box.mode == "open" and any(box.on_face(v) for v in path)
            return PassageResult(float(cost), path, len(path) - 1, touched, src, dst,
                                 {"hop_budget": budget})
        if used == budget:
            continue
        for c in range(nbr.shape[1]):
            x = int(nbr[u, c])
            if x < 0 or used + 1 >= best_used[x]:
                continue
            parents.append(lab)
            nodes.append(x)
            heapq.heappush(heap, (cost + float(step[u, c]), used + 1, x, len(nodes) - 1))
    raise InfeasibleError(f"no path within {budget} vertices")


def averaging_m(v) -> int:
    """floor(|v|^(1/4))."""
    return math.isqrt(math.isqrt(l1_norm(v)))


@dataclass
class ShiftSpec:
    """Random endpoint shift: d blocks of m*m fair bits mapped through g_m."""

    m: int
    bits: np.ndarray
    z: tuple

    def __post_init__(self):
        from .influence import averaging_function
        self.bits = np.asarray(self.bits, dtype=np.int8)
        if self.bits.ndim != 2 or self.bits.shape[1] != self.m * self.m:
            raise ValueError("bits must have shape (d, m*m)")
        g = averaging_function(self.m)
        want = tuple(int(g(row)) for row in self.bits)
        if self.z is None:
            self.z = want
        elif tuple(self.z) != want:
            raise ValueError("z does not match g_m of the bits")
        self.z = tuple(self.z)

    @classmethod
    def draw(cls, v, rng):
        """Shift for target ``v`` using bits from numpy Generator ``rng``."""
        v = as_vertex(v)
        m = averaging_m(v)
        if m < 1:
            raise ValueError("|v| must be >= 1")
        bits = rng.integers(0, 2, size=(len(v), m * m), dtype=np.int8)
        return cls(m, bits, None)

    @classmethod
    def zero(cls, d, m=1):
        return cls(m, np.zeros((d, m * m), dtype=np.int8), None)


def shifted_passage(fld: WeightField, v, shift: ShiftSpec) -> PassageResult:
    """T(z, v + z) for the shift's z."""
    v = as_vertex(v)
    z = shift.z
    if len(z) != len(v):
        raise LatticeError("shift dimension mismatch")
    return passage_time(fld, z, tuple(a + b for a, b in zip(v, z)))


def geodesic_bound(n_dist, a, b, indexing="bond"):
    """Largest edge count an optimal path can need when weights lie in [a, b].

    Bond: a path with k edges costs >= a k and the straight path <= b n, so
    k <= (b/a) n.  Site: with k + 1 vertices, k + 1 <= (b/a)(n + 1).
    """
    if a <= 0:
        raise BoundUnavailable("bound unavailable: weights not bounded away from 0")
    if b < a:
        raise ValueError("need a <= b")
    if indexing == "bond":
        return (b / a) * n_dist
    return (b / a) * (n_dist + 1) - 1


def geodesic_length_check(result: PassageResult, a, b, indexing="bond") -> bool:
    return result.edge_count <= geodesic_bound(distance(result.src, result.dst), a, b, indexing) + 1e-9


def write_geodesic(path, result: PassageResult):
    """One vertex per line, coordinates separated by spaces."""
    with open(path, "w") as fh:
        for v in result.geodesic:
            fh.write(" ".join(str(c) for c in v) + "\n")


def read_geodesic(path):
    with open(path) as fh:
        return [tuple(int(c) for c in line.split()) for line in fh if line.strip()]
