import pytest
from hypothesis import given, settings, strategies as st

from fpplab.lattice import (BoxSpec, LatticeError, TooLargeToEnumerate, UnionFind, Edge,
                            animal_array, edge_between, edges, enumerate_animals,
                            is_connected, l1_norm, neighbors)
from oracles import fixed_polyominoes


def test_neighbors_corner_interior_wrap():
    box = BoxSpec((0, 0), (2, 2))
    assert set(neighbors((0, 0), box)) == {(1, 0), (0, 1)}
    assert len(neighbors((1, 1), box)) == 4
    torus = BoxSpec.from_shape((3, 3), "torus")
    assert set(neighbors((0, 0), torus)) == {(1, 0), (2, 0), (0, 1), (0, 2)}


def test_neighbors_outside_box():
    with pytest.raises(LatticeError):
        neighbors((3, 0), BoxSpec((0, 0), (2, 2)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(2, 5), min_size=2, max_size=3), st.sampled_from(["open", "torus"]))
def test_neighbors_symmetric(shape, mode):
    box = BoxSpec.from_shape(tuple(shape), mode)
    for v in box.vertices():
        nb = neighbors(v, box)
        assert len(nb) == 2 * box.d if mode == "torus" else len(nb) <= 2 * box.d
        for w in nb:
            assert v in neighbors(w, box)


def test_neighbor_table_matches_neighbors():
    box = BoxSpec((-1, 2), (3, 5), "torus")
    for i, v in enumerate(box.vertices()):
        assert [box.vertex(j) for j in box.neighbor_table[i]] == neighbors(v, box)


def test_l1_norm():
    assert l1_norm((0, 0)) == 0
    assert l1_norm((3, -4)) == 7
    assert l1_norm((1, 1, 1)) == 3
    with pytest.raises(OverflowError):
        l1_norm((2**61, 2**61 + 5))


def test_box_validation():
    with pytest.raises(LatticeError):
        BoxSpec((0,), (3,))
    with pytest.raises(LatticeError):
        BoxSpec((0, 0), (-1, 2))
    with pytest.raises(LatticeError):
        BoxSpec((0, 0), (0, 3), "torus")
    # unequal torus sides are fine
    assert BoxSpec.from_shape((2, 5), "torus").size == 10


def test_index_is_lexicographic():
    box = BoxSpec((-2, -1), (1, 3))
    verts = list(box.vertices())
    assert verts == sorted(verts)
    assert all(box.index(v) == i for i, v in enumerate(verts))


def test_edges_count_and_canonical():
    open_box = BoxSpec.from_shape((3, 4))
    assert len(list(edges(open_box))) == 2 * 3 * 4 - 3 - 4
    torus = BoxSpec.from_shape((3, 4), "torus")
    assert len(list(edges(torus))) == 2 * 12
    assert edge_between((2, 0), (0, 0), torus) == Edge((2, 0), 0)
    assert Edge((2, 0), 0).head(torus) == (0, 0)
    with pytest.raises(LatticeError):
        edge_between((0, 0), (2, 0), open_box)


def test_on_face():
    box = BoxSpec((0, 0), (4, 4))
    assert box.on_face((0, 2)) and box.on_face((4, 4)) and not box.on_face((2, 2))
    assert not box.with_mode("torus").on_face((0, 0))


def test_union_find():
    uf = UnionFind(5)
    uf.union(0, 1)
    uf.union(3, 4)
    assert uf.connected(0, 1) and not uf.connected(1, 3)
    assert is_connected({(0, 0), (0, 1), (1, 1)})
    assert not is_connected({(0, 0), (1, 1)})


def test_animals_small():
    assert list(enumerate_animals(1)) == [frozenset({(0, 0)})]
    assert len(list(enumerate_animals(2))) == 4
    assert len(list(enumerate_animals(3))) == 18


@pytest.mark.parametrize("n", range(1, 7))
def test_animal_count_matches_polyomino_identity(n):
    animals = list(enumerate_animals(n))
    assert len(set(animals)) == len(animals)
    assert all(len(a) == n and (0, 0) in a and is_connected(a) for a in animals)
    assert len(animals) == n * fixed_polyominoes(n)


def test_animals_3d():
    assert len(list(enumerate_animals(2, 3))) == 6
    # 3d fixed polycubes: 1, 3, 15
    assert animal_array(3, 3).shape[0] == 3 * 15


def test_animal_cap():
    with pytest.raises(TooLargeToEnumerate):
        animal_array(12, 2, cap=1000)
    with pytest.raises(TooLargeToEnumerate):
        list(enumerate_animals(9, 2, cap=10))
