import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conelab.errors import DomainError
from conelab.sweeps import (DEFAULT_WINDOW, EXPERIMENTS, ExperimentConfig,
                            expected_exponent, fit_exponent, report, run_sweep,
                            sized_grid)


def test_fit_exponent_recovers_power_law():
    deltas = [2.0**-k for k in range(3, 9)]
    pts = [(d, 7.0 * (1.0 / d) ** 0.5, 0.0) for d in deltas]
    alpha, pref, resid = fit_exponent(pts)
    assert alpha == pytest.approx(0.5, abs=1e-12)
    assert pref == pytest.approx(7.0, rel=1e-10)
    assert resid == pytest.approx(0.0, abs=1e-12)


def test_fit_exponent_constant_is_flat():
    pts = [(2.0**-k, 3.0, 0.0) for k in range(3, 8)]
    alpha, pref, _ = fit_exponent(pts)
    assert alpha == pytest.approx(0.0, abs=1e-12)
    assert pref == pytest.approx(3.0)


def test_fit_exponent_log_masquerades_as_small_power():
    # log(1/delta) growth over a dyadic decade fits a small positive slope
    pts = [(2.0**-k, math.log(2.0**k), 0.0) for k in range(3, 11)]
    alpha, _, resid = fit_exponent(pts)
    assert 0.0 < alpha < 0.3
    assert resid > 0.0


def test_fit_exponent_input_validation():
    with pytest.raises(DomainError):
        fit_exponent([(0.5, 1.0, 0.0), (0.25, 2.0, 0.0)])
    with pytest.raises(DomainError):
        fit_exponent([(0.5, 1.0, 0.0), (0.25, -2.0, 0.0),
                      (0.125, 3.0, 0.0)])


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(0.1, 10.0), alpha=st.floats(-1.0, 1.0))
def test_fit_exponent_scale_invariance(scale, alpha):
    deltas = [2.0**-k for k in range(2, 7)]
    base = [(d, (1.0 / d) ** alpha, 0.0) for d in deltas]
    scaled = [(d, scale * r, 0.0) for d, r, _ in base]
    a0, _, _ = fit_exponent(base)
    a1, _, _ = fit_exponent(scaled)
    assert a1 == pytest.approx(a0, abs=1e-9)


def test_config_validation():
    with pytest.raises(DomainError):
        ExperimentConfig("no_such_experiment")
    with pytest.raises(DomainError):
        ExperimentConfig("cordoba2d", deltas=(0.3,))
    with pytest.raises(DomainError):
        ExperimentConfig("cordoba2d", deltas=(2.0**-4, 2.0**-3))
    with pytest.raises(DomainError):
        ExperimentConfig("cordoba2d", deltas=())
    with pytest.raises(DomainError):
        ExperimentConfig("cordoba2d", engine="magic")
    with pytest.raises(DomainError):
        ExperimentConfig("cordoba2d", seeds=0)


def test_expected_exponents_by_experiment():
    assert expected_exponent(ExperimentConfig("cordoba2d", p=4.0)) == 0.0
    assert expected_exponent(
        ExperimentConfig("cordoba2d", p=6.0)) == pytest.approx(0.5 - 2.0 / 6)
    assert expected_exponent(
        ExperimentConfig("cone_l8", n=3, p=8.0)) == pytest.approx(0.0)
    assert expected_exponent(
        ExperimentConfig("extremizer_sweep", n=2, p=6.0,
                         variant="bochner_riesz")) == pytest.approx(1.0 / 6)
    assert expected_exponent(ExperimentConfig("lemma_suite")) == 0.0


def test_sized_grid_shapes():
    spec = sized_grid(2.0**-4, 2)
    assert spec.points_per_axis == 256
    assert spec.nyquist == pytest.approx(2.0)


def test_sweep_result_pass_window():
    cfg = ExperimentConfig("cordoba2d", p=4.0, deltas=(2.0**-3, 2.0**-4),
                           seeds=2, samples=10_000)
    res = run_sweep(cfg)
    # fewer than 3 deltas: no fit, exponent defaults to 0
    assert res.exponent == 0.0
    lo, hi = DEFAULT_WINDOW
    assert res.passed == (res.expected - lo <= 0.0 <= res.expected + hi)
    assert all(row["m"] == 8 for row in res.rows)


def test_sweep_is_deterministic():
    cfg = ExperimentConfig("maximal_sweep", deltas=(2.0**-3, 2.0**-4),
                           seeds=3)
    a = run_sweep(cfg)
    b = run_sweep(cfg)
    assert a.points == b.points
    assert a.rows == b.rows


def test_report_writes_stable_csv(tmp_path):
    cfg = ExperimentConfig("maximal_sweep", deltas=(2.0**-3, 2.0**-4),
                           seeds=2)
    res = run_sweep(cfg)
    paths1 = report([res], str(tmp_path / "a"))
    paths2 = report([res], str(tmp_path / "b"))
    with open(paths1[0], "rb") as f1, open(paths2[0], "rb") as f2:
        assert f1.read() == f2.read()
    assert paths1[0].endswith(".csv")
    assert any(p.endswith(".svg") for p in paths1)
    for p in paths1:
        assert os.path.getsize(p) > 0


def test_report_empty_results_header_only(tmp_path):
    paths = report([], str(tmp_path))
    with open(paths[0]) as fh:
        lines = fh.read().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("experiment,")


def test_experiment_registry_is_complete():
    assert set(EXPERIMENTS) == {
        "cordoba2d", "smooth_caps_nd", "sharp_polyhedra", "cone_l8",
        "reverse_sqfn", "lemma_suite", "extremizer_sweep", "maximal_sweep"}
