"""Parameter sweeps and figure-level experiments built on the solvers.

Sweep points are independent, so they are farmed out to a process pool
whose size comes from ``TRIMERHEAT_WORKERS`` (default: CPU count).  Results
are always returned in grid order.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from . import exact, lindblad
from .errors import BracketError, TrimerError
from .gaussian import GaussianState, fidelity_two_mode
from .model import TrimerParams

WORKERS_ENV = "TRIMERHEAT_WORKERS"

LINDBLAD_COLUMNS = (
    "theta",
    "J21",
    "J23",
    "J13",
    "JQ1",
    "JQ2",
    "JQ3",
    "Teff1",
    "Teff2",
    "Teff3",
    "entropy_production",
)
EXACT_COLUMNS = ("theta", "J21", "J23", "J13", "relative_drift")


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer")
        return n
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    workers = default_workers() if workers is None else workers
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def theta_grid(n: int = 61) -> np.ndarray:
    return np.linspace(0.0, 2 * math.pi, n)


def params_record(p: TrimerParams) -> dict:
    return asdict(p)


@dataclass(frozen=True)
class SweepResult:
    axis: str
    grid: np.ndarray
    solver: str
    columns: tuple[str, ...]
    rows: list[dict]
    provenance: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])


def _lindblad_point(p: TrimerParams, with_temperatures: bool = True) -> dict:
    rep = lindblad.steady_state(p, with_temperatures=with_temperatures)
    J = p.J if p.J > 0 else 1.0
    row = {"theta": p.theta}
    row.update(J21=rep.J21 / J, J23=rep.J23 / J, J13=rep.J13 / J)
    for k in range(3):
        row[f"JQ{k + 1}"] = float(rep.heat_currents[k]) / (p.gamma * p.omega)
    if with_temperatures:
        for k in range(3):
            row[f"Teff{k + 1}"] = rep.effective_temperatures[k] / p.omega
        row["entropy_production"] = rep.entropy_production
    else:
        for k in range(3):
            row[f"Teff{k + 1}"] = math.nan
        row["entropy_production"] = math.nan
    row["entropy_production_bath"] = rep.entropy_production_bath
    return row


def _exact_point(p: TrimerParams, bath: dict) -> dict:
    res = exact.quasi_steady_currents(p, **bath)
    return {
        "theta": p.theta,
        "J21": res.J21 / p.J,
        "J23": res.J23 / p.J,
        "J13": res.J13 / p.J,
        "relative_drift": res.relative_drift,
    }


def bath_options(p: TrimerParams, n: int = 400, omega_c: float | None = None, tau_ss: float | None = None, **kw) -> dict:
    """Keyword arguments for :func:`exact.quasi_steady_currents` (baths built here)."""
    hot, cold = exact.default_baths(p, omega_c, n)
    out = {"hot": hot, "cold": cold, "tau_ss": tau_ss, "check": False}
    out.update(kw)
    return out


def _annotated(fn, p: TrimerParams):
    try:
        return fn(p)
    except TrimerError as exc:
        raise type(exc)(f"at theta = {p.theta!r}, J/gamma = {p.J_over_gamma!r}: {exc}") from exc


def _run_lindblad(p):
    return _annotated(_lindblad_point, p)


def _run_exact(args):
    p, bath = args
    return _annotated(partial(_exact_point, bath=bath), p)


def sweep_theta(
    solver: str,
    p: TrimerParams,
    grid=None,
    *,
    workers: int | None = None,
    n_bath: int = 400,
    omega_c: float | None = None,
    tau_ss: float | None = None,
) -> SweepResult:
    """Currents over the loop phase, with the other parameters held at ``p``.

    Lindblad rows also carry heat currents (units of gamma omega), effective
    temperatures (units of omega) and the entropy production rate.
    """
    grid = theta_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("theta grid must be strictly increasing")
    if grid.min() < 0 or grid.max() > 2 * math.pi + 1e-12:
        raise ValueError("theta grid must lie in [0, 2 pi]")
    points = [p.with_(theta=float(t)) for t in grid]
    prov = {"params": params_record(p)}
    if solver == "lindblad":
        rows = parallel_map(_run_lindblad, points, workers)
        columns = LINDBLAD_COLUMNS
    elif solver == "exact":
        bath = bath_options(p, n_bath, omega_c, tau_ss)
        prov["bath"] = {"n": n_bath, "omega_c": bath["hot"].omega_c, "tau_ss": tau_ss or 6.0 / p.gamma}
        rows = parallel_map(_run_exact, [(q, bath) for q in points], workers)
        columns = EXACT_COLUMNS
    else:
        raise ValueError(f"unknown solver {solver!r}; use 'lindblad' or 'exact'")
    return SweepResult("theta", grid, solver, columns, rows, prov)


# ----------------------------------------------------------------------------- critical ratio


@dataclass(frozen=True)
class CriticalRatioResult:
    estimate: float
    bracket: tuple[float, float]
    T_cold: float
    steps: list[dict]


def exact_j13(p: TrimerParams, J_over_gamma: float, **bath) -> tuple[float, float]:
    """Exact-bath ``<J_13>(pi/2) / J`` and its plateau drift."""
    q = p.with_(J=J_over_gamma * p.gamma, theta=math.pi / 2)
    res = exact.quasi_steady_currents(q, **bath_options(q, **bath))
    return res.J13 / q.J, res.relative_drift


def find_critical_ratio(
    p: TrimerParams,
    bracket: tuple[float, float] = (0.1, 2.0),
    tol: float = 0.02,
    **bath,
) -> CriticalRatioResult:
    """Bisect on J/gamma for the sign change of the exact-bath ``<J_13>(pi/2)``.

    The Lindblad value at every probed ratio is logged for contrast.
    """
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise BracketError("bracket must satisfy 0 < low < high")
    steps = []

    def probe(r):
        v, drift = exact_j13(p, r, **bath)
        q = p.with_(J=r * p.gamma, theta=math.pi / 2)
        lv = lindblad.steady_state(q, with_temperatures=False).J13 / q.J
        steps.append({"J_over_gamma": r, "J13": v, "J13_lindblad": lv, "relative_drift": drift})
        return v

    f_lo, f_hi = probe(lo), probe(hi)
    if f_lo == 0:
        return CriticalRatioResult(lo, (lo, lo), p.T_cold, steps)
    if f_hi == 0:
        return CriticalRatioResult(hi, (hi, hi), p.T_cold, steps)
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(
            f"<J_13>(pi/2) has the same sign at J/gamma = {lo} ({f_lo:.3g}) and {hi} ({f_hi:.3g})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = probe(mid)
        if f_mid == 0:
            lo = hi = mid
            break
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return CriticalRatioResult(0.5 * (lo + hi), (lo, hi), p.T_cold, steps)


# ----------------------------------------------------------------------------- fidelity


def _pair_state(C) -> GaussianState:
    idx = [0, 2]
    return GaussianState.from_correlations(np.asarray(C)[np.ix_(idx, idx)])


def _fidelity_point(args) -> dict:
    p, bath = args
    C_l = lindblad.steady_correlations(p)
    res = exact.quasi_steady_currents(p, **bath)
    F = fidelity_two_mode(_pair_state(C_l), _pair_state(res.C))
    return {"J_over_gamma": p.J_over_gamma, "theta": p.theta, "fidelity": F}


def fidelity_comparison(
    p: TrimerParams,
    ratios: Sequence[float] = (0.1, 0.6, 1.2),
    thetas=None,
    *,
    workers: int | None = None,
    n_bath: int = 400,
    omega_c: float | None = None,
    tau_ss: float | None = None,
) -> list[dict]:
    """Fidelity of the sites-(1,3) reduced state, Lindblad versus exact bath."""
    thetas = theta_grid() if thetas is None else np.asarray(thetas, dtype=float)
    tasks = []
    for r in ratios:
        for t in thetas:
            q = p.with_(J=float(r) * p.gamma, theta=float(t))
            tasks.append((q, bath_options(q, n_bath, omega_c, tau_ss)))
    return parallel_map(_fidelity_point, tasks, workers)


# ----------------------------------------------------------------------------- systematic errors


@dataclass(frozen=True)
class ErrorGrid:
    deltas: np.ndarray
    epsilons: np.ndarray
    J13_at_pi: np.ndarray  # [i_delta, j_epsilon], units of J
    swap_ratio: np.ndarray  # J23(2 pi) / J21(pi)
    reference_J13: float  # |J13(pi/2)| / J at the symmetric point
    threshold: float

    @property
    def deviation(self) -> np.ndarray:
        """Worse of the two relative degradations: switch leakage and swap imbalance."""
        return np.maximum(np.abs(self.J13_at_pi) / self.reference_J13, np.abs(self.swap_ratio - 1.0))

    @property
    def robust(self) -> np.ndarray:
        return self.deviation <= self.threshold


def _grid_point(p: TrimerParams) -> tuple[float, float]:
    at_pi = lindblad.steady_state(p.with_(theta=math.pi), with_temperatures=False)
    at_2pi = lindblad.steady_state(p.with_(theta=2 * math.pi), with_temperatures=False)
    return at_pi.J13 / p.J, at_2pi.J23 / at_pi.J21


def error_grid(
    p: TrimerParams,
    deltas=None,
    epsilons=None,
    threshold: float = 0.1,
) -> ErrorGrid:
    """Switch leakage ``<J_13>(pi)`` and swap ratio over hopping and damping asymmetries."""
    deltas = np.linspace(-0.3, 0.3, 41) if deltas is None else np.asarray(deltas, dtype=float)
    epsilons = np.linspace(-0.3, 0.3, 41) if epsilons is None else np.asarray(epsilons, dtype=float)
    base = p.with_(delta=0.0, epsilon=0.0, theta=math.pi / 2)
    ref = abs(lindblad.steady_state(base, with_temperatures=False).J13 / base.J)
    j13 = np.empty((len(deltas), len(epsilons)))
    swap = np.empty_like(j13)
    for i, d in enumerate(deltas):
        for j, e in enumerate(epsilons):
            j13[i, j], swap[i, j] = _grid_point(p.with_(delta=float(d), epsilon=float(e)))
    return ErrorGrid(deltas, epsilons, j13, swap, ref, threshold)


# ----------------------------------------------------------------------------- benchmark


BENCH_OMEGA_C = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
BENCH_TAU = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
BENCH_N = (100, 200, 400, 800)


def _bench_point(args) -> dict:
    p, n, wc, tau = args
    hot, cold = exact.default_baths(p, wc * p.omega, n)
    res = exact.quasi_steady_currents(p, hot, cold, tau / p.gamma, check=False)
    return {
        "N": n,
        "omega_c": wc,
        "tau_ss": tau,
        "J13": res.J13 / p.J,
        "relative_drift": res.relative_drift,
        "recurrence_ok": res.recurrence_ok,
    }


def benchmark_exact(
    p: TrimerParams,
    omega_cs: Sequence[float] = BENCH_OMEGA_C,
    taus: Sequence[float] = BENCH_TAU,
    sizes: Sequence[int] = BENCH_N,
    *,
    workers: int | None = None,
) -> dict[str, list[dict]]:
    """Exact-bath ``<J_13>(pi/2)/J`` against the Lindblad value along three axes.

    Defaults elsewhere: N = 400, omega_c = 3 omega, tau_ss = 6/gamma.
    ``tau_ss`` is in units of ``1/gamma`` and ``omega_c`` in units of omega.
    """
    q = p.with_(theta=math.pi / 2)
    ref = lindblad.steady_state(q, with_temperatures=False).J13 / q.J
    axes = {
        "omega_c": [(q, 400, wc, 6.0) for wc in omega_cs],
        "tau_ss": [(q, 400, 3.0, t) for t in taus],
        "N": [(q, n, 3.0, 6.0) for n in sizes],
    }
    out = {}
    for name, tasks in axes.items():
        rows = parallel_map(_bench_point, tasks, workers)
        for r in rows:
            r["J13_lindblad"] = ref
            r["relative_deviation"] = (r["J13"] - ref) / abs(ref)
        out[name] = rows
    return out


__all__ = [
    "CriticalRatioResult",
    "ErrorGrid",
    "SweepResult",
    "benchmark_exact",
    "error_grid",
    "exact_j13",
    "fidelity_comparison",
    "find_critical_ratio",
    "parallel_map",
    "sweep_theta",
    "theta_grid",
]
