import math

import numpy as np
import pytest
from scipy import stats

from fpplab.animals import (AnimalScore, DivergentIntegral, greedy_exact, greedy_heuristic,
                            martin_integral, martin_ratio_experiment)
from fpplab.lattice import BoxSpec, LatticeError, TooLargeToEnumerate, is_connected
from fpplab.weights import WeightField, gen_iid


def site_field(box, seed, dist=((0.0, 0.5), (1.0, 0.5))):
    return gen_iid(box, "site", list(dist), seed)


def brute_animals(n):
    """Origin-containing animals by growth with set dedup (independent of the package)."""
    level = {frozenset({(0, 0)})}
    for _ in range(n - 1):
        nxt = set()
        for a in level:
            for (x, y) in a:
                for w in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                    if w not in a:
                        nxt.add(a | {w})
        level = nxt
    return level


def test_exact_trivial():
    box = BoxSpec.cube(4, 2)
    fld = site_field(box, 1)
    assert greedy_exact(fld, 1).value == fld.site((0, 0))
    ones = WeightField(box, "site", np.ones(box.shape))
    for n in (1, 3, 5):
        assert greedy_exact(ones, n).value == n


def test_exact_matches_brute_force():
    box = BoxSpec.cube(2, 2)
    vals = np.random.default_rng(3).random(box.shape)
    fld = WeightField(box, "site", vals)
    animals = brute_animals(3)
    assert len(animals) == 18
    want = max(sum(fld.site(v) for v in a) for a in animals)
    got = greedy_exact(fld, 3)
    assert got.value == pytest.approx(want, abs=1e-12) and got.exact
    assert sum(fld.site(v) for v in got.witness) == pytest.approx(got.value, abs=1e-9)


def test_exact_guards():
    with pytest.raises(LatticeError):
        greedy_exact(site_field(BoxSpec.cube(2, 2), 0), 4)
    with pytest.raises(TooLargeToEnumerate, match="heuristic"):
        greedy_exact(site_field(BoxSpec.cube(6, 2), 0), 7, cap=100)
    with pytest.raises(LatticeError):
        greedy_exact(gen_iid(BoxSpec.cube(3, 2), "bond", [(1.0, 1.0)], 0), 2)


def test_witness_validation():
    with pytest.raises(AssertionError):
        AnimalScore(2, 1.0, frozenset({(0, 0), (2, 0)}), True)
    with pytest.raises(AssertionError):
        AnimalScore(2, 1.0, frozenset({(1, 0), (2, 0)}), True)


@pytest.mark.parametrize("strategy", ["greedy-growth", "multi-start", "anneal"])
def test_heuristic_valid_and_below_exact(strategy):
    box = BoxSpec.cube(6, 2)
    ones = WeightField(box, "site", np.ones(box.shape))
    assert greedy_heuristic(ones, 6, strategy, restarts=4, steps=50).value == 6
    for seed in range(5):
        fld = site_field(box, seed, ((0.0, 0.3), (1.0, 0.3), (3.0, 0.4)))
        h = greedy_heuristic(fld, 6, strategy, restarts=8, steps=200, seed=seed)
        e = greedy_exact(fld, 6)
        assert not h.exact and h.value <= e.value + 1e-12
        assert len(h.witness) == 6 and is_connected(h.witness) and (0, 0) in h.witness
        assert sum(fld.site(v) for v in h.witness) == pytest.approx(h.value, abs=1e-9)


def test_multistart_dominates_greedy():
    box = BoxSpec.cube(10, 2)
    for seed in range(5):
        fld = gen_iid(box, "site", [(0.0, 0.5), (1.0, 0.5)], seed)
        g = greedy_heuristic(fld, 10, "greedy-growth")
        m = greedy_heuristic(fld, 10, "multi-start", restarts=64, seed=seed)
        assert m.value >= g.value


def test_heuristic_unknown_strategy():
    with pytest.raises(ValueError):
        greedy_heuristic(site_field(BoxSpec.cube(3, 2), 0), 3, "bogus")


def test_martin_integral_atoms():
    for d in (2, 3):
        for p in (0.1, 0.5, 0.9):
            assert martin_integral([(0.0, 1 - p), (1.0, p)], d) == pytest.approx(p ** (1 / d), abs=1e-12)
            a, b = 1.5, 4.0
            want = a + (b - a) * p ** (1 / d)
            assert martin_integral([(a, 1 - p), (b, p)], d) == pytest.approx(want, abs=1e-12)
    assert martin_integral([(1.0, 1.0)], 2) == 1.0


def test_martin_integral_continuous():
    assert martin_integral(stats.uniform(), 2) == pytest.approx(2 / 3, abs=1e-10)
    assert martin_integral(stats.expon(), 2) == pytest.approx(2.0, abs=1e-8)
    with pytest.raises(DivergentIntegral):
        martin_integral(stats.pareto(1.5), 2)
    with pytest.raises(ValueError):
        martin_integral([(-1.0, 1.0)], 2)


def test_martin_experiment_point_mass():
    rows, vals = martin_ratio_experiment([(1.0, 1.0)], 2, [1, 2, 3, 4], 5, seed=0)
    assert all(r.mean_ratio == 1.0 and r.integral == 1.0 and r.normalized == 1.0 for r in rows)
    assert np.array_equal(vals, np.tile([1.0, 2.0, 3.0, 4.0], (5, 1)))


def test_martin_experiment_monotone_and_deterministic():
    dist = [(0.0, 0.5), (1.0, 0.5)]
    rows, vals = martin_ratio_experiment(dist, 2, range(1, 6), 30, seed=4)
    assert np.all(np.diff(vals, axis=1) >= 0)
    assert all(r.exact for r in rows)
    assert rows[0].integral == pytest.approx(math.sqrt(0.5))
    for r in rows:
        assert r.ci_low <= r.mean_ratio <= r.ci_high
    rows2, vals2 = martin_ratio_experiment(dist, 2, range(1, 6), 30, seed=4)
    assert np.array_equal(vals, vals2) and rows == rows2


def test_martin_experiment_continuous_and_heuristic():
    rows, vals = martin_ratio_experiment(stats.expon(), 2, [2, 13], 3, seed=1)
    assert rows[0].exact and not rows[1].exact
    assert np.all(vals[:, 1] >= vals[:, 0])
