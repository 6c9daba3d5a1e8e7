import math

import numpy as np
import pytest

import exlab


def test_catalog_lists_builtins():
    names = {k["name"] for k in exlab.kernels()}
    assert {"ar1", "det-contract", "geo-kill", "logn-drift", "const-fail"} <= names
    q = {k["name"]: k["analytic_q"] for k in exlab.kernels()}
    assert q["geo-kill"] == pytest.approx(1 + 1 / 0.3)


def test_kernel_overrides():
    k = exlab.kernel("det-contract", rho=0.25)
    assert k["z_law"]["params"]["value"] == 0.25
    with pytest.raises(ValueError):
        exlab.kernel("no-such-kernel")


def test_simulate_halving_from_fixed_start():
    states, atom = exlab.simulate("det-contract", 3, seed=5, x0=8.0)
    assert np.allclose(states, [8.0, 4.0, 2.0, 1.0])
    assert atom.tolist() == [False, False, False, True]


def test_simulate_is_reproducible():
    a, _ = exlab.simulate("ar1", 1000, seed=9)
    b, _ = exlab.simulate("ar1", 1000, seed=9)
    c, _ = exlab.simulate("ar1", 1000, seed=10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_cycles_estimate_q_for_geo_kill():
    q, lengths, maxima = exlab.cycles("geo-kill", 200_000, seed=2)
    assert len(lengths) == q["n"]
    assert abs(q["value"] - (1 + 1 / 0.3)) < 4 * q["se"]
    assert np.all(maxima > 0)


def test_constants_for_point_mass():
    c = exlab.constants({"family": "deterministic_point", "params": {"value": 0.5}}, 1.0, q=3.0)
    assert c["c"]["value"] == 1.0
    assert c["theta_regenerative"]["value"] == pytest.approx(0.25)


def test_limit_sample_halving_stacks():
    g = {"family": "deterministic_point", "params": {"value": 0.5}}
    times, marks, ids = exlab.sample_limit(1.0, 2.0, g, delta=1.0, s_max=50.0, mark_floor=0.25, seed=4)
    assert len(times) == len(marks) == len(ids)
    assert np.all(np.diff(times) >= 0)
    assert np.all(marks > 0.25)


def test_nu_box_closed_form():
    # Y = 1: nu([0, x] x (y, inf]) = y^-a - x^-a for y < x.
    assert exlab.nu_box(2.0, 1.0, 4.0, 1.0) == pytest.approx(1 - 1 / 16)
    assert exlab.nu_box(2.0, 1.0, math.inf, 2.0) == pytest.approx(0.25)


def test_guard_maps_to_exception():
    with pytest.raises(exlab.GuardTripped):
        exlab.simulate("const-fail", 5000, seed=1, x0=5.0, cycle_cap=100)


def test_diagnose_flags_const_fail():
    reports = {r["condition_id"]: r for r in exlab.diagnose("const-fail", seed=3)}
    assert reports["drift_back"]["verdict"] == "fail"
