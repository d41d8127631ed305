"""Smoke tests for the python bindings: construction, calibration, a
noiseless end-to-end solve, and gap evaluation."""

import math

import pytest

dpvi = pytest.importorskip("dpvi")


def test_calibrate_worked_example():
    cal = dpvi.calibrate(epsilon=1.0, delta=1e-5, n=1000, d_w=5, d_theta=5)
    assert cal["iterations"] == 1000
    assert cal["batch_size"] == 32
    assert abs(cal["sigma_w"] - 0.10730) <= 1e-4


def test_instance_and_dataset():
    inst = dpvi.make_instance("bilinear_ssp", {"d_w": 3, "d_theta": 3})
    assert inst.dim == 6
    assert inst.is_saddle_point
    data = dpvi.sample_dataset(inst, 16, seed=7)
    assert len(data) == 16
    g = inst.population_operator([0.0] * 6)
    assert len(g) == 6


def test_noiseless_solve_contracts_to_equilibrium():
    inst = dpvi.make_instance("scalar_square_vi")
    res = dpvi.solve(inst, n=256, seed=3, exact=True, lam=0.125)
    assert res["rounds"] == 4
    assert abs(res["final_point"][0]) <= res["final_radius"] + 1e-6
    assert res["gap"] <= res["final_radius"] ** 2 / 2 + 1e-6


def test_gap_oracles_on_square_example():
    inst = dpvi.make_instance("scalar_square_vi")
    assert dpvi.sp_gap(inst, [1.0], []) == pytest.approx(1.0)
    assert dpvi.vi_gap(inst, [1.0]) == pytest.approx(0.5)


def test_probes_and_errors():
    lin = dpvi.make_instance("linear_vi", {"d": 3})
    probe = dpvi.uas_probe(lin, weight=1.0, n=20, trials=5, seed=2)
    assert probe["pass"]
    with pytest.raises(ValueError):
        dpvi.make_instance("no_such_kind")
    with pytest.raises(ValueError):
        dpvi.sp_gap(dpvi.make_instance("scalar_square_vi"), [5.0], [])


def test_exact_sweep_slope_is_negative():
    out = dpvi.rate_sweep(
        "bilinear_ssp",
        {"d_w": 1, "d_theta": 1, "noise": 0.3, "param_seed": 4,
         "zero_offsets": 0},
        n_values=[64, 128, 256, 512],
        seeds=3,
        exact=True,
    )
    assert all(not c["failed"] for c in out["cells"])
    assert out["fit"]["valid"]
    assert out["fit"]["slope"] < 0
    gaps = {a["n"]: a["mean_gap"] for a in out["aggregates"]}
    assert gaps[512] < gaps[64]
