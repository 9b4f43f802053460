"""Weak-coupling steady state of the loop under local thermal dissipators.

With jump operators ``a_l`` (rate ``gamma_l (N_l + 1)``) and ``a_l^dag``
(rate ``gamma_l N_l``) the correlations ``C_lm = <a_l^dag a_m>`` obey

    dC/dt = A C + C A^dag + Q,    A = i h^T - Gamma/2,    Q = diag(gamma_l N_l)

and the steady state solves the Lyapunov equation ``A C + C A^dag + Q = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .gaussian import (
    EffectiveTemperature,
    GaussianState,
    effective_temperature,
    solve_lyapunov,
)
from .model import LinkPhaseAssignment, TrimerParams, build_single_particle_hamiltonian, link_currents


def drift_and_diffusion(
    p: TrimerParams, gauge: LinkPhaseAssignment | None = None, *, rotating: bool = True
) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    h = build_single_particle_hamiltonian(p, gauge, rotating=rotating)
    gammas = p.gammas
    A = 1j * h.T - 0.5 * np.diag(gammas)
    Q = np.diag(gammas * p.bath_occupations).astype(complex)
    return A, Q


def steady_correlations(
    p: TrimerParams, gauge: LinkPhaseAssignment | None = None, *, rotating: bool = True
) -> NDArray[np.complex128]:
    A, Q = drift_and_diffusion(p, gauge, rotating=rotating)
    return solve_lyapunov(A, Q)


def heat_currents(p: TrimerParams, occupations) -> NDArray[np.float64]:
    """Bath-to-site energy currents ``gamma_l omega (N_l - n_l)``."""
    return p.gammas * p.omega * (p.bath_occupations - np.asarray(occupations, dtype=float))


@dataclass(frozen=True)
class SteadyStateReport:
    params: TrimerParams
    C: NDArray[np.complex128]
    currents: tuple[float, float, float]  # (J21, J23, J13)
    heat_currents: NDArray[np.float64]
    occupations: NDArray[np.float64]
    effective_temperatures: tuple[float, float, float] | None
    entropy_production: float | None
    entropy_production_bath: float
    second_law_slack: float | None
    teff_details: tuple[EffectiveTemperature, ...] | None = None

    @property
    def J21(self) -> float:
        return self.currents[0]

    @property
    def J23(self) -> float:
        return self.currents[1]

    @property
    def J13(self) -> float:
        return self.currents[2]


def site_state(C, site: int) -> GaussianState:
    """Reduced single-mode Gaussian state of ``site`` (1-based)."""
    k = site - 1
    return GaussianState.from_correlations(np.asarray(C)[k : k + 1, k : k + 1])


def _teff_bracket(p: TrimerParams) -> tuple[float, float]:
    return 0.01 * p.omega, 4.0 * max(p.T_hot, p.T_cold)


def effective_temperatures(report: SteadyStateReport, **kwargs) -> tuple[EffectiveTemperature, ...]:
    """Per-site trace-distance effective temperatures of a steady state."""
    p = report.params
    kwargs.setdefault("bracket", _teff_bracket(p))
    return tuple(effective_temperature(site_state(report.C, s), p.omega, **kwargs) for s in (1, 2, 3))


def entropy_production(report: SteadyStateReport) -> float:
    """``-sum_l J^Q_l / T^eff_l``."""
    if report.effective_temperatures is None:
        raise ValueError("report has no effective temperatures")
    return float(-np.sum(report.heat_currents / np.asarray(report.effective_temperatures)))


def steady_state(
    p: TrimerParams,
    gauge: LinkPhaseAssignment | None = None,
    *,
    with_temperatures: bool = True,
    rotating: bool = True,
) -> SteadyStateReport:
    C = steady_correlations(p, gauge, rotating=rotating)
    h = build_single_particle_hamiltonian(p, gauge)
    occ = np.real(np.diag(C)).copy()
    jq = heat_currents(p, occ)
    report = SteadyStateReport(
        params=p,
        C=C,
        currents=link_currents(C, h),
        heat_currents=jq,
        occupations=occ,
        effective_temperatures=None,
        entropy_production=None,
        entropy_production_bath=float(-np.sum(jq / p.bath_temperatures)),
        second_law_slack=None,
    )
    if not with_temperatures:
        return report
    details = effective_temperatures(report)
    teff = tuple(d.temperature for d in details)
    slack = float(np.sum(jq / np.asarray(teff)))
    return SteadyStateReport(
        params=p,
        C=C,
        currents=report.currents,
        heat_currents=jq,
        occupations=occ,
        effective_temperatures=teff,
        entropy_production=-slack,
        entropy_production_bath=report.entropy_production_bath,
        second_law_slack=slack,
        teff_details=details,
    )
