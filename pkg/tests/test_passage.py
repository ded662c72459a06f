import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpplab.lattice import BoxSpec, LatticeError, distance
from fpplab.passage import (BoundUnavailable, InfeasibleError, ShiftSpec, averaging_m,
                            distance_map, geodesic_bound, geodesic_length_check, passage_time,
                            passage_time_hop_constrained, read_geodesic, shifted_passage,
                            write_geodesic)
from fpplab.weights import WeightField, gen_iid
from oracles import brute_passage, path_cost, simple_paths


def const_field(box, indexing, a):
    shape = box.shape if indexing == "site" else (box.d,) + box.shape
    return WeightField(box, indexing, np.full(shape, float(a)))


def test_constant_bond_and_site():
    box = BoxSpec((-2, -2), (8, 6))
    v = (5, 3)
    assert passage_time(const_field(box, "bond", 1.5), (0, 0), v).value == 1.5 * 8
    assert passage_time(const_field(box, "site", 1.5), (0, 0), v).value == 1.5 * 9


def test_trivial_path():
    fld = gen_iid(BoxSpec.from_shape((3, 3)), "site", [(1.0, 0.5), (4.0, 0.5)], 2)
    r = passage_time(fld, (1, 1), (1, 1))
    assert r.value == fld.site((1, 1)) and r.geodesic == [(1, 1)] and r.edge_count == 0
    fb = gen_iid(BoxSpec.from_shape((3, 3)), "bond", [(1.0, 0.5), (4.0, 0.5)], 2)
    assert passage_time(fb, (1, 1), (1, 1)).value == 0.0


# 2x3 grid: vertices (i, j), i in 0..1, j in 0..2; bond weights
FIXTURE_2x3 = np.array([
    [[5.0, 1.0, 2.0], [0.0, 0.0, 0.0]],   # axis 0: (0,j)-(1,j)
    [[4.0, 3.0, 0.0], [1.0, 1.0, 0.0]],   # axis 1: (i,j)-(i,j+1); last column unused
])


def test_fixture_2x3_matches_enumeration():
    box = BoxSpec.from_shape((2, 3))
    fld = WeightField(box, "bond", FIXTURE_2x3)
    want = brute_passage(FIXTURE_2x3, "bond", box.lower, box.upper, (0, 0), (0, 2))
    r = passage_time(fld, (0, 0), (0, 2))
    # straight row 4+3 beats 4+1+1+2 and 5+1+1+2
    assert r.value == want == 7.0
    assert r.geodesic == [(0, 0), (0, 1), (0, 2)]


def test_endpoints_outside_box():
    fld = const_field(BoxSpec.from_shape((3, 3)), "bond", 1)
    with pytest.raises(LatticeError):
        passage_time(fld, (0, 0), (3, 0))


def open_boxes(max_vertices=12):
    for h in range(1, max_vertices + 1):
        for w in range(1, max_vertices // h + 1):
            yield (h, w)


@pytest.mark.parametrize("indexing", ["site", "bond"])
def test_brute_force_small_boxes(indexing):
    rng = np.random.default_rng(4)
    for shape in open_boxes():
        box = BoxSpec.from_shape(shape)
        for _ in range(3):
            vshape = shape if indexing == "site" else (2,) + shape
            vals = rng.integers(0, 4, size=vshape).astype(float)
            fld = WeightField(box, indexing, vals)
            verts = list(box.vertices())
            src, dst = verts[0], verts[rng.integers(len(verts))]
            r = passage_time(fld, src, dst)
            assert r.value == brute_passage(vals, indexing, box.lower, box.upper, src, dst)
            assert abs(fld.path_weight(r.geodesic) - r.value) <= 1e-9
            assert r.geodesic[0] == src and r.geodesic[-1] == dst


def test_geodesic_tie_break_lexicographic():
    # constant field: all monotone paths tie; smallest sequence steps along axis 0 first
    box = BoxSpec.from_shape((3, 3))
    r = passage_time(const_field(box, "bond", 1), (0, 0), (2, 2))
    assert r.geodesic == [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2)]
    # zero field: the fewest-edge optimal paths are kept, then lexicographic
    z = passage_time(const_field(box, "bond", 0), (0, 0), (2, 2))
    assert z.edge_count == 4 and z.geodesic == r.geodesic


def test_tie_break_matches_enumeration():
    rng = np.random.default_rng(1)
    box = BoxSpec.from_shape((3, 4))
    for _ in range(30):
        vals = rng.integers(0, 2, size=(2, 3, 4)).astype(float)
        fld = WeightField(box, "bond", vals)
        paths = simple_paths(box.lower, box.upper, (0, 0), (2, 3))
        costs = [path_cost(vals, "bond", box.lower, p) for p in paths]
        best = min(costs)
        opt = [p for p, c in zip(paths, costs) if c == best]
        fewest = min(len(p) for p in opt)
        want = min(p for p in opt if len(p) == fewest)
        assert passage_time(fld, (0, 0), (2, 3)).geodesic == want


def test_touched_boundary():
    box = BoxSpec.from_shape((5, 5))
    assert passage_time(const_field(box, "bond", 1), (0, 0), (2, 2)).touched_boundary
    assert not passage_time(const_field(box, "bond", 1), (1, 1), (3, 3)).touched_boundary


def test_torus_wraps():
    box = BoxSpec.from_shape((6, 6), "torus")
    assert passage_time(const_field(box, "bond", 1), (0, 0), (5, 0)).value == 1
    assert passage_time(const_field(box.with_mode("open"), "bond", 1), (0, 0), (5, 0)).value == 5


fields = st.tuples(st.sampled_from(["site", "bond"]), st.integers(0, 2**31))


def random_field(indexing, seed, shape=(6, 6)):
    return gen_iid(BoxSpec.from_shape(shape), indexing, [(0.0, 0.2), (1.0, 0.4), (2.5, 0.4)], seed)


@settings(max_examples=40, deadline=None)
@given(fields, st.data())
def test_symmetry_and_triangle(fs, data):
    fld = random_field(*fs)
    pts = st.tuples(st.integers(0, 5), st.integers(0, 5))
    u, w, x = data.draw(pts), data.draw(pts), data.draw(pts)
    tuw = passage_time(fld, u, w).value
    assert tuw == pytest.approx(passage_time(fld, w, u).value, abs=1e-9)
    rhs = passage_time(fld, u, x).value + passage_time(fld, x, w).value
    if fld.is_site:
        rhs -= fld.site(x)
    assert tuw <= rhs + 1e-9


@settings(max_examples=40, deadline=None)
@given(fields, st.floats(0.1, 3.0))
def test_monotonicity_in_weights(fs, delta):
    fld = random_field(*fs)
    src, dst = (0, 1), (5, 4)
    r = passage_time(fld, src, dst)
    # raising any weight never lowers T
    vals = fld.values.copy()
    vals.flat[7] += delta
    assert passage_time(WeightField(fld.box, fld.indexing, vals), src, dst).value >= r.value
    # lowering a geodesic weight by delta lowers T by at most delta
    v = r.geodesic[2]
    vals = fld.values.copy()
    if fld.is_site:
        vals[v] = max(0.0, vals[v] - delta)
    else:
        e = next(a for a in range(2) if r.geodesic[1][a] != r.geodesic[2][a])
        tail = min(r.geodesic[1], r.geodesic[2])
        vals[(e,) + tail] = max(0.0, vals[(e,) + tail] - delta)
    new = passage_time(WeightField(fld.box, fld.indexing, vals), src, dst).value
    assert r.value - delta - 1e-9 <= new <= r.value


@settings(max_examples=30, deadline=None)
@given(fields)
def test_optimality_certificate(fs):
    fld = random_field(*fs)
    dst = (4, 5)
    lab, _ = distance_map(fld, dst)
    r = passage_time(fld, (1, 0), dst)
    geo = r.geodesic
    assert lab[geo[0]] == pytest.approx(r.value, abs=1e-9)
    for u, w in zip(geo, geo[1:]):
        step = fld.site(u) if fld.is_site else fld.bond(u, w)
        assert lab[u] - lab[w] == pytest.approx(step, abs=1e-9)


# --- hop constrained ---

def test_hop_constraint_inactive_and_infeasible():
    fld = gen_iid(BoxSpec.from_shape((8, 8)), "bond", [(1.0, 0.5), (2.0, 0.5)], 3)
    src, dst = (1, 1), (5, 4)
    t = passage_time(fld, src, dst).value
    assert passage_time_hop_constrained(fld, src, dst, 3.0).value == t
    with pytest.raises(InfeasibleError):
        passage_time_hop_constrained(fld, src, dst, 1.0)
    with pytest.raises(ValueError):
        passage_time_hop_constrained(fld, src, dst, 0.0)


def test_zero_detour_exceeds_budget():
    # 4x4 grid: the straight row costs 3, a zero-weight detour around needs 10 vertices
    box = BoxSpec.from_shape((4, 4))
    vals = np.full((2, 4, 4), 1.0)
    detour = [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (0, 3)]
    for u, w in zip(detour, detour[1:]):
        a = 0 if u[0] != w[0] else 1
        vals[(a,) + min(u, w)] = 0.0
    fld = WeightField(box, "bond", vals)
    t = passage_time(fld, (0, 0), (0, 3))
    assert t.value == 0.0 and t.vertex_count == 10
    for c1 in (1.5, 2.0, 3.0):
        hat = passage_time_hop_constrained(fld, (0, 0), (0, 3), c1)
        want = brute_passage(vals, "bond", box.lower, box.upper, (0, 0), (0, 3),
                             max_vertices=int(np.ceil(c1 * 3)))
        assert hat.value == want
        assert hat.vertex_count <= np.ceil(c1 * 3)
    assert passage_time_hop_constrained(fld, (0, 0), (0, 3), 2.0).value > 0.0
    assert passage_time_hop_constrained(fld, (0, 0), (0, 3), 10 / 3).value == 0.0


@settings(max_examples=30, deadline=None)
@given(fields)
def test_hop_constrained_nonincreasing_in_c1(fs):
    fld = random_field(*fs)
    src, dst = (0, 0), (3, 2)
    t = passage_time(fld, src, dst)
    prev = np.inf
    for c1 in (1.2, 1.5, 2.0, 3.0, 5.0):
        hat = passage_time_hop_constrained(fld, src, dst, c1).value
        assert t.value - 1e-9 <= hat <= prev + 1e-9
        prev = hat
    assert passage_time_hop_constrained(fld, src, dst, t.vertex_count / 5).value == t.value


# --- shifts ---

def test_averaging_m():
    assert averaging_m((15, 0)) == 1
    assert averaging_m((16, 0)) == 2
    assert averaging_m((80, 1)) == 3
    assert averaging_m((256, 0)) == 4


def test_shift_draw_range():
    rng = np.random.default_rng(0)
    for _ in range(200):
        s = ShiftSpec.draw((16, 0), rng)
        assert s.m == 2 and s.bits.shape == (2, 4)
        assert all(0 <= z <= 2 for z in s.z)
    with pytest.raises(ValueError):
        ShiftSpec(2, np.zeros((2, 4)), (1, 0))


def test_shifted_passage():
    box = BoxSpec((-2, -2), (24, 6))
    fld = gen_iid(box, "bond", [(1.0, 0.5), (2.0, 0.5)], 1)
    v = (16, 0)
    assert shifted_passage(fld, v, ShiftSpec.zero(2)).value == passage_time(fld, (0, 0), v).value
    c = const_field(box, "bond", 1.25)
    rng = np.random.default_rng(1)
    for _ in range(10):
        assert shifted_passage(c, v, ShiftSpec.draw(v, rng)).value == 1.25 * 16
    with pytest.raises(LatticeError):
        shifted_passage(const_field(BoxSpec((0, 0), (16, 2)), "bond", 1), v,
                        ShiftSpec(1, np.array([[1], [0]]), None))


# --- geodesic length bound ---

def test_geodesic_bound_checks():
    box = BoxSpec((-10, -10), (30, 10))
    r = passage_time(const_field(box, "bond", 2), (0, 0), (20, 0))
    assert r.edge_count == 20 and geodesic_length_check(r, 2, 2)
    with pytest.raises(BoundUnavailable):
        geodesic_length_check(r, 0, 2)
    for seed in range(20):
        fld = gen_iid(box, "bond", [(1.0, 0.5), (2.0, 0.5)], seed)
        r = passage_time(fld, (0, 0), (20, 0))
        assert r.edge_count <= 40 and geodesic_length_check(r, 1, 2)
        s = passage_time(gen_iid(box, "site", [(1.0, 0.5), (2.0, 0.5)], seed), (0, 0), (20, 0))
        assert geodesic_length_check(s, 1, 2, "site")
    assert geodesic_bound(10, 1, 2) == 20 and geodesic_bound(10, 1, 2, "site") == 21


def test_equal_weights_monotone_geodesic():
    box = BoxSpec((-3, -3), (9, 9))
    r = passage_time(const_field(box, "site", 3), (0, 0), (4, 5))
    assert r.edge_count == 9
    assert all(distance(a, b) == 1 for a, b in zip(r.geodesic, r.geodesic[1:]))
    assert all(w[0] >= u[0] and w[1] >= u[1] for u, w in zip(r.geodesic, r.geodesic[1:]))


def test_geodesic_io(tmp_path):
    box = BoxSpec.from_shape((5, 5))
    r = passage_time(random_field("bond", 3, (5, 5)), (0, 0), (4, 4))
    write_geodesic(tmp_path / "g.txt", r)
    assert read_geodesic(tmp_path / "g.txt") == r.geodesic
