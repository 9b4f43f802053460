"""Acceptance criteria 1-12, one test each, at the stated tolerances.

Each check returns ``(passed, detail)``.  The verdict lines are printed in
the pytest terminal summary (see ``conftest.py``) and by running this file
directly: ``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from trimerheat import analysis, closed, exact, fock, lindblad
from trimerheat.model import TrimerParams

RESULTS: dict[int, tuple[bool, str]] = {}

FIG3 = TrimerParams.from_ratio(0.1)  # gamma = 0.03 omega, T_H = 5 omega, T_C = 3 omega
GRID101 = np.linspace(0.0, 2 * math.pi, 101)
N_PI = (0, 50, 100)  # grid indices of 0, pi, 2 pi
HALF_PI = (25, 75)


def criterion_1():
    t0 = time.perf_counter()
    j13 = np.array([lindblad.steady_state(FIG3.with_(theta=t), with_temperatures=False).J13 for t in GRID101])
    elapsed = time.perf_counter() - t0
    s = np.sin(GRID101)
    c = j13 @ s / (s @ s)
    resid = np.linalg.norm(j13 - c * s) / np.linalg.norm(c * s)
    c_over_J = c / FIG3.J
    rel = abs(c_over_J - 0.0398) / 0.0398
    ok = resid < 0.05 and rel <= 0.10 and elapsed < 5
    return ok, f"sin fit residual {resid:.2e}; c/J = {c_over_J:.5f} vs 0.0398 ({rel:+.0%} off, tol 10%); {elapsed:.2f} s"


def criterion_2():
    worst13 = worst_sym = 0.0
    for t in (0.0, math.pi, 2 * math.pi):
        r = lindblad.steady_state(FIG3.with_(theta=t), with_temperatures=False)
        worst13 = max(worst13, abs(r.J13) / FIG3.J)
        worst_sym = max(worst_sym, abs(r.J21 - r.J23) / FIG3.J)
    ok = worst13 <= 1e-9 and worst_sym <= 1e-9
    return ok, f"max |J13|/J = {worst13:.1e}, max |J21-J23|/J = {worst_sym:.1e} at theta = n pi"


@pytest.fixture(scope="module")
def sweep101():
    return analysis.sweep_theta("lindblad", FIG3, GRID101, workers=1)


def _sweep101():
    return analysis.sweep_theta("lindblad", FIG3, GRID101, workers=1)


def criterion_3(sweep=None):
    sweep = sweep or _sweep101()
    slack = []
    for t in GRID101:
        slack.append(lindblad.steady_state(FIG3.with_(theta=t)).second_law_slack)
    slack = np.array(slack)
    ep = sweep.column("entropy_production")
    tol = 1e-12 * abs(ep).max()
    maxima_ok = all(ep[i] >= ep.max() - tol for i in N_PI)
    minima_ok = all(ep[i] <= ep.min() + tol for i in HALF_PI)
    ok = slack.max() <= 1e-10 and maxima_ok and minima_ok
    return ok, (
        f"max sum J^Q/T^eff = {slack.max():.3e}; entropy production max at n pi: {maxima_ok}, "
        f"min at (2n+1) pi/2: {minima_ok}"
    )


def criterion_4(sweep=None):
    sweep = sweep or _sweep101()
    T1, T3 = sweep.column("Teff1"), sweep.column("Teff3")
    eq = max(abs(T1[i] - T3[i]) for i in N_PI)
    interior = slice(1, 50)
    order = bool(np.all(T1[interior] < T3[interior]))
    ok = eq <= 1e-5 and order
    return ok, f"max |T1-T3| at n pi = {eq:.1e} omega; T1 < T3 on (0, pi): {order}"


def criterion_5():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(10):
        p = TrimerParams.from_ratio(
            rng.uniform(0.05, 1.0),
            theta=rng.uniform(0, 2 * math.pi),
            delta=rng.uniform(-0.3, 0.3),
            epsilon=rng.uniform(-0.3, 0.3),
            T_hot=0.4,
            T_cold=0.25,
        )
        oracle = fock.integrate_to_steady(p)
        worst = max(worst, float(np.abs(oracle.C - lindblad.steady_correlations(p)).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 120
    return ok, f"max elementwise |C_lyap - C_fock| = {worst:.2e} over 10 tuples; {elapsed:.1f} s"


def criterion_6():
    p = FIG3.with_(theta=math.pi / 2)
    t0 = time.perf_counter()
    res = exact.quasi_steady_currents(p)
    elapsed = time.perf_counter() - t0
    ref = lindblad.steady_state(p, with_temperatures=False).J13
    rel = (res.J13 - ref) / abs(ref)
    ok = abs(rel) <= 0.15 and elapsed < 120
    return ok, f"exact J13/J = {res.J13 / p.J:.4f}, lindblad {ref / p.J:.4f} ({rel:+.0%}, tol 15%); {elapsed:.1f} s"


def criterion_7():
    p = TrimerParams.from_ratio(1.2)
    hot, cold = exact.default_baths(p)
    mid = exact.quasi_steady_currents(p.with_(theta=math.pi / 2), hot, cold)
    totals = []
    for t in np.linspace(0, 2 * math.pi, 61):
        r = exact.quasi_steady_currents(p.with_(theta=t), hot, cold, check=False)
        totals.append(r.J21 + r.J23)
    jt_min = min(totals) / p.J
    ok = mid.J13 < 0 and mid.J23 < 0 and jt_min > 0
    return ok, (
        f"at pi/2: J13/J = {mid.J13 / p.J:.3f}, J23/J = {mid.J23 / p.J:.3f} "
        f"(J21/J = {mid.J21 / p.J:.3f}); min over theta of (J21+J23)/J = {jt_min:.3f}"
    )


def criterion_8():
    t0 = time.perf_counter()
    crit = {}
    for tc in (3.0, 3.5, 4.0, 4.5):
        crit[tc] = analysis.find_critical_ratio(FIG3.with_(T_cold=tc)).estimate
    elapsed = time.perf_counter() - t0
    vals = [crit[k] for k in sorted(crit)]
    mono = bool(np.all(np.diff(vals) > 0))
    ok = abs(crit[3.0] - 0.46) <= 0.05 and abs(crit[4.5] - 1.0) <= 0.1 and mono and elapsed < 4 * 1800
    listing = ", ".join(f"T_C={k}: {v:.3f}" for k, v in crit.items())
    return ok, f"(J/gamma)_crit {listing}; increasing: {mono}; {elapsed:.0f} s for four bisections"


def criterion_9():
    weak = analysis.fidelity_comparison(FIG3, [0.1], analysis.theta_grid(61), workers=1)
    fmin = min(r["fidelity"] for r in weak)
    f_weak_half = analysis.fidelity_comparison(FIG3, [0.1], [math.pi / 2], workers=1)[0]["fidelity"]
    strong = analysis.fidelity_comparison(FIG3, [0.6, 1.2], [math.pi / 2], workers=1)
    lower = all(r["fidelity"] < f_weak_half for r in strong)
    ok = fmin > 0.99 and lower
    detail = ", ".join(f"J/gamma={r['J_over_gamma']:.1f}: {r['fidelity']:.5f}" for r in strong)
    return ok, f"min F over theta at J/gamma=0.1 = {fmin:.6f}; at pi/2 {detail} vs {f_weak_half:.6f}"


def criterion_10():
    times = np.linspace(0, 10, 201)
    drift = 0.0
    for t in np.linspace(0, 2 * math.pi, 9):
        run = closed.evolve_closed(closed.closed_params(t), times=times)
        drift = max(drift, float(np.abs(run.occupations.sum(axis=1) - 1).max()))
    zero = max(
        float(np.abs(closed.evolve_closed(closed.closed_params(t), times=times).currents[:, 2]).max())
        for t in (0.0, math.pi, 2 * math.pi)
    )
    a = closed.evolve_closed(closed.closed_params(math.pi / 2), times=[2.0]).currents[0, 2]
    b = closed.evolve_closed(closed.closed_params(3 * math.pi / 2), times=[2.0]).currents[0, 2]
    ok = drift <= 1e-10 and zero <= 1e-10 and a * b < 0 and a < 0
    return ok, f"number drift {drift:.1e}; max |J13| at n pi {zero:.1e}; J13(Jt=2) = {a:+.3f} / {b:+.3f} J"


def criterion_11():
    g = analysis.error_grid(FIG3, np.array([0.0]), np.array([-0.2, -0.1, 0.0, 0.1, 0.2]))
    origin = g.J13_at_pi[0, 2]
    leak = np.delete(g.J13_at_pi[0], 2)
    swap = g.swap_ratio[0, 2]
    ok = abs(origin) <= 1e-9 and bool(np.all(np.abs(leak) > 1e-9)) and abs(swap - 1) <= 1e-9
    return ok, f"J13(pi)/J at origin {origin:.1e}; min |J13(pi)|/J for eps != 0: {np.abs(leak).min():.2e}; swap {swap:.12f}"


def criterion_12():
    tabs = analysis.benchmark_exact(FIG3, workers=1)
    wc = {r["omega_c"]: r["relative_deviation"] for r in tabs["omega_c"]}
    tau = {r["tau_ss"]: r["relative_deviation"] for r in tabs["tau_ss"]}
    nvals = np.array([r["J13"] for r in tabs["N"]])
    wc_ok = all(abs(v) <= 0.15 for k, v in wc.items() if k > 1.5)
    tau_ok = all(abs(v) <= 0.15 for k, v in tau.items() if k > 2)
    n_spread = (nvals.max() - nvals.min()) / abs(nvals.mean())
    n_ok = n_spread < 0.05
    ok = wc_ok and tau_ok and n_ok
    fmt = lambda d: " ".join(f"{k:g}:{v:+.0%}" for k, v in d.items())  # noqa: E731
    return ok, (
        f"omega_c deviations [{fmt(wc)}] agree above 1.5: {wc_ok}; "
        f"tau_ss deviations [{fmt(tau)}] agree above 2: {tau_ok}; N spread {n_spread:.1e} flat: {n_ok}"
    )


CHECKS = {k: globals()[f"criterion_{k}"] for k in range(1, 13)}


def _record(k, fn, *args):
    ok, detail = fn(*args)
    RESULTS[k] = (ok, detail)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}")
    return ok, detail


@pytest.mark.parametrize("k", [1, 2, 5, 6, 7, 8, 9, 10, 11, 12])
def test_criterion(k):
    ok, detail = _record(k, CHECKS[k])
    assert ok, detail


def test_criterion_3(sweep101):
    ok, detail = _record(3, criterion_3, sweep101)
    assert ok, detail


def test_criterion_4(sweep101):
    ok, detail = _record(4, criterion_4, sweep101)
    assert ok, detail


if __name__ == "__main__":
    for k, fn in CHECKS.items():
        _record(k, fn)
