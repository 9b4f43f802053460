from __future__ import annotations

import math

import numpy as np
import pytest

from trimerheat import analysis
from trimerheat.errors import BracketError
from trimerheat.model import TrimerParams

FIG3 = TrimerParams.from_ratio(0.1)


def test_theta_grid_validation():
    with pytest.raises(ValueError):
        analysis.sweep_theta("lindblad", FIG3, [0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        analysis.sweep_theta("lindblad", FIG3, [0.0, 7.0])
    with pytest.raises(ValueError):
        analysis.sweep_theta("magic", FIG3, [0.0, 1.0])


@pytest.fixture(scope="module")
def lindblad_sweep():
    return analysis.sweep_theta("lindblad", FIG3, analysis.theta_grid(101), workers=1)


def test_sweep_shape_and_provenance(lindblad_sweep):
    r = lindblad_sweep
    assert len(r.rows) == 101
    assert r.columns == analysis.LINDBLAD_COLUMNS
    assert r.provenance["params"]["J"] == FIG3.J
    assert all(set(r.columns) <= set(row) for row in r.rows)


def test_sine_law(lindblad_sweep):
    j13, s = lindblad_sweep.column("J13"), np.sin(lindblad_sweep.grid)
    c = j13 @ s / (s @ s)
    assert np.linalg.norm(j13 - c * s) < 0.05 * np.linalg.norm(c * s)


def test_shift_symmetry(lindblad_sweep):
    # grid index k + 50 is theta + pi
    j21, j23 = lindblad_sweep.column("J21"), lindblad_sweep.column("J23")
    np.testing.assert_allclose(j21[:51], j23[50:], atol=1e-12)


def test_switch_semantics(lindblad_sweep):
    j13 = lindblad_sweep.column("J13")
    assert np.all(j13[1:50] > 0) and np.all(j13[51:100] < 0)


def test_parallel_matches_serial():
    grid = np.linspace(0, math.pi, 5)
    a = analysis.sweep_theta("lindblad", FIG3, grid, workers=1)
    b = analysis.sweep_theta("lindblad", FIG3, grid, workers=2)
    assert a.rows == b.rows


def test_workers_env(monkeypatch):
    monkeypatch.setenv(analysis.WORKERS_ENV, "3")
    assert analysis.default_workers() == 3
    monkeypatch.setenv(analysis.WORKERS_ENV, "0")
    with pytest.raises(ValueError):
        analysis.default_workers()


def test_exact_sweep_family_and_shift_symmetry():
    grid = [math.pi / 2, 3 * math.pi / 2]
    vals = []
    for r in (0.1, 0.3, 0.6, 1.2):
        s = analysis.sweep_theta("exact", FIG3.with_(J=r * FIG3.gamma), grid, workers=1, n_bath=400)
        vals.append(s.column("J13")[0])
        np.testing.assert_allclose(s.column("J21")[0], s.column("J23")[1], rtol=1e-8)
    # positive in the weak-coupling pair, reversed in the strong pair, falling past the peak
    assert vals[0] > 0 and vals[1] > 0 and vals[2] < 0 and vals[3] < 0
    assert np.all(np.diff(vals[1:]) < 0)


def test_critical_ratio_requires_sign_change():
    with pytest.raises(BracketError):
        analysis.find_critical_ratio(FIG3, (0.1, 0.2), n=200)
    with pytest.raises(BracketError):
        analysis.find_critical_ratio(FIG3, (0.5, 0.2))


def test_critical_ratio_bisection():
    res = analysis.find_critical_ratio(FIG3, (0.2, 0.8), tol=0.05)
    lo, hi = res.bracket
    assert hi - lo <= 0.05
    assert lo <= res.estimate <= hi
    by_ratio = {s["J_over_gamma"]: s["J13"] for s in res.steps}
    assert by_ratio[0.2] > 0 > by_ratio[0.8]
    assert all(s["J13_lindblad"] > 0 for s in res.steps)


def test_error_grid_origin_and_leak():
    axis = np.array([-0.2, 0.0, 0.2])
    g = analysis.error_grid(FIG3, axis, axis)
    assert g.J13_at_pi[1, 1] == pytest.approx(0.0, abs=1e-12)
    assert g.swap_ratio[1, 1] == pytest.approx(1.0, abs=1e-9)
    assert abs(g.J13_at_pi[1, 0]) > 1e-6 and abs(g.J13_at_pi[1, 2]) > 1e-6
    assert g.robust[1, 1]


def test_error_grid_small_asymmetries_stay_robust():
    axis = np.linspace(-0.02, 0.02, 5)
    g = analysis.error_grid(FIG3, axis, axis, threshold=0.2)
    assert g.robust.all()
    wide = analysis.error_grid(FIG3, np.array([0.3]), np.array([0.3]), threshold=0.2)
    assert not wide.robust.all()


def test_fidelity_point():
    rows = analysis.fidelity_comparison(FIG3, [0.1], [math.pi / 2], workers=1)
    assert rows[0]["fidelity"] > 0.99
    assert rows[0]["theta"] == pytest.approx(math.pi / 2)


def test_benchmark_table_structure():
    tabs = analysis.benchmark_exact(FIG3, omega_cs=(1.5,), taus=(6.0,), sizes=(200,), workers=1)
    assert set(tabs) == {"omega_c", "tau_ss", "N"}
    row = tabs["N"][0]
    assert row["N"] == 200 and row["recurrence_ok"]
    assert row["relative_deviation"] == pytest.approx((row["J13"] - row["J13_lindblad"]) / row["J13_lindblad"])
