import json
import math

import numpy as np
import pytest

from fpplab._stats import unbiased_var
from fpplab.experiments import (SCAN_COLUMNS, ExperimentSpec, ScanRow, box_for, generate_spins,
                                nonincreasing_within_ci, path_length_statistics, read_scan_csv,
                                same_sign_connected, shift_invariance_test,
                                signchange_connectivity_check, variance_scan, write_records_jsonl,
                                write_scan_csv)
from fpplab.lattice import BoxSpec
from fpplab.passage import passage_time
from fpplab.weights import ModelSpec, SpinField, sign_change_weights

IID = ModelSpec("iid-two-valued", a=1.0, b=2.0, p=0.5, indexing="bond")


def small(model=IID, **kw):
    base = dict(sizes=(4, 8), replications=20, seed=3, n_boot=200)
    base.update(kw)
    return ExperimentSpec(model, **base)


def test_spec_validation():
    with pytest.raises(ValueError):
        small(sizes=(1,))
    with pytest.raises(ValueError):
        small(replications=1)
    with pytest.raises(ValueError):
        small(margin_factor=0.5)
    spec = small(direction=(1, 1))
    assert spec.target(9) == (5, 4)
    assert ExperimentSpec.from_dict(spec.to_dict()) == spec


def test_box_for_margin():
    box = box_for((10, 0), 1.5)
    assert box.lower == (-8, -8) and box.upper == (18, 8)
    assert box_for((3, -4), 1.0).lower == (-4, -8)


def test_deterministic_field_zero_variance():
    spec = small(ModelSpec("iid-two-valued", p=1.0, indexing="bond"))
    res = variance_scan(spec)
    assert all(r.variance == 0 for r in res.rows)
    assert all(r.var_ci_low == 0 == r.var_ci_high for r in res.rows)
    assert [r.mean for r in res.rows] == [8.0, 16.0]


def test_same_seed_zero_variance():
    res = variance_scan(small(replications=2, same_seed=True))
    assert all(r.variance == 0 for r in res.rows)


def test_scan_rows_consistent():
    spec = small()
    res = variance_scan(spec)
    assert res.valid
    for row in res.rows:
        vals = [rec["value"] for rec in res.records if rec["v"] == row.v]
        assert row.variance == pytest.approx(float(unbiased_var(np.array(vals))), abs=0)
        assert row.var_ci_low <= row.variance <= row.var_ci_high
        assert row.var_over_v == row.variance / row.v
        assert row.var_log_v_over_v == pytest.approx(row.variance * math.log(row.v) / row.v)
        assert row.boundary_touch_fraction == 0 and row.geodesic_bound_violations == 0


def test_scan_independent_of_workers_and_order():
    a = variance_scan(small())
    b = variance_scan(small(workers=3))
    c = variance_scan(small(sizes=(8, 4)))
    assert a.rows == b.rows and a.records == b.records
    assert a.rows[1] == c.rows[0]


def test_scan_invalid_on_boundary_touch():
    res = variance_scan(small(margin_factor=1.0, sizes=(2,), replications=200,
                              model=ModelSpec("iid-two-valued", a=0.0, b=5.0, p=0.5,
                                              indexing="bond")))
    assert res.rows[0].boundary_touch_fraction > 0
    assert not res.valid and "boundary-touch" in res.diagnostics[0]
    assert res.rows[0].geodesic_bound_violations == -1


def test_scan_csv_round_trip(tmp_path):
    spec = small()
    res = variance_scan(spec)
    write_scan_csv(tmp_path / "s.csv", res, spec)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == f"# spec_hash={spec.hash()}"
    assert lines[1] == ",".join(SCAN_COLUMNS)
    assert read_scan_csv(tmp_path / "s.csv") == res.rows
    write_records_jsonl(tmp_path / "r.jsonl", res.records)
    recs = [json.loads(x) for x in (tmp_path / "r.jsonl").read_text().splitlines()]
    assert recs == res.records


def test_nonincreasing_within_ci():
    def row(v, var, lo, hi):
        return ScanRow(v, 10, 0.0, var, lo, hi, var / v, 0.0, 0.0, 0)
    assert nonincreasing_within_ci([row(10, 5, 4, 6), row(20, 8, 6, 12)]) == [True]
    assert nonincreasing_within_ci([row(10, 5, 4, 6), row(20, 16, 14, 18)]) == [False]
    assert nonincreasing_within_ci([row(10, 5, 4, 6), row(20, 6, 5, 7)]) == [True]


def test_dependent_scan_runs():
    spec = small(ModelSpec("ising-ab-site", beta=0.2, sweeps=8), sizes=(4,), replications=5)
    res = variance_scan(spec)
    assert res.valid and res.rows[0].geodesic_bound_violations == 0


# --- shift invariance ---

def test_shift_constant_field():
    rep = shift_invariance_test(small(ModelSpec("iid-two-valued", p=0.0)), 16, 20)
    assert rep.ks_statistic == 0 and rep.var_f == rep.var_shifted == 0
    assert rep.diff_ci_contains_zero


def test_shift_small_m():
    rep = shift_invariance_test(small(), 8, 40)
    assert rep.m == 1 and 0 <= rep.ks_pvalue <= 1
    assert rep.diff_ci_low <= rep.var_diff <= rep.diff_ci_high


# --- sign-change connectivity ---

def test_same_sign_connected_cases():
    box = BoxSpec.from_shape((5, 5), "torus")
    plus = SpinField(box, np.ones(25))
    assert same_sign_connected(plus, (0, 0), (4, 4))
    s = np.ones((5, 5))
    s[4, 4] = -1
    assert not same_sign_connected(SpinField(box, s), (0, 0), (4, 4))
    # a wall of minus spins splits the plus region when wrapping is not allowed
    s = np.ones((5, 5))
    s[2, :] = -1
    sf = SpinField(box, s)
    assert not same_sign_connected(sf, (0, 0), (4, 0))
    fld = sign_change_weights(sf).as_open()
    assert passage_time(fld, (0, 0), (4, 0)).value == 2


def test_signchange_agreement_small():
    model = ModelSpec("ising-signchange", beta=0.3, sweeps=16)
    rep = signchange_connectivity_check(model, 8, 40, seed=2)
    assert rep.agreement == 1.0 and rep.agreements == 40
    with pytest.raises(ValueError):
        signchange_connectivity_check(IID, 8, 2)


def test_generate_spins_matches_field():
    from fpplab.weights import generate_field
    model = ModelSpec("ising-signchange", beta=0.3, sweeps=8)
    box = box_for((8, 0))
    spins = generate_spins(model, box, 5, 1, 2)
    fld = generate_field(model, box, 5, 1, 2)
    assert np.array_equal(sign_change_weights(spins).values, fld.values)


# --- path lengths ---

def test_path_length_trivial_regimes():
    spec = small()
    rows = path_length_statistics(spec, (8, 16), 20, c1=2.0 + 1 / 8)
    assert all(r.fraction == 0 for r in rows)
    rows = path_length_statistics(spec, (8,), 20, c1=0.9)
    assert rows[0].fraction == 1.0
    assert rows[0].ci_low <= 1.0 <= rows[0].ci_high
