"""Isolated loop (no baths) starting from one excitation on a chosen site.

The Hamiltonian conserves particle number and is quadratic, so second
moments close: ``C(t) = conj(U) C(0) U^T`` with ``U = exp(-i h t)``.  This is
exact for the Fock initial state as well as for Gaussian ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError
from .gaussian import HermitianPropagator
from .model import LinkPhaseAssignment, TrimerParams, build_single_particle_hamiltonian, link_currents

DEFAULT_J_OVER_OMEGA = 3e-3


@dataclass(frozen=True)
class ClosedRun:
    params: TrimerParams
    initial_site: int
    times: NDArray[np.float64]  # units of 1/J
    C: NDArray[np.complex128]  # shape (len(times), 3, 3)
    currents: NDArray[np.float64]  # columns J21, J23, J13, in units of J

    @property
    def occupations(self) -> NDArray[np.float64]:
        return np.real(np.einsum("tii->ti", self.C))


def closed_params(theta: float, J_over_omega: float = DEFAULT_J_OVER_OMEGA, omega: float = 1.0) -> TrimerParams:
    return TrimerParams(J=J_over_omega * omega, theta=theta, gamma=0.0, omega=omega)


def evolve_closed(
    p: TrimerParams,
    gauge: LinkPhaseAssignment | None = None,
    initial_site: int = 2,
    times=None,
    *,
    rotating: bool = True,
) -> ClosedRun:
    """Correlations and currents on ``times`` (in units of ``1/J``); gamma is ignored."""
    if initial_site not in (1, 2, 3):
        raise DomainError("initial site must be 1, 2 or 3")
    if p.J <= 0:
        raise DomainError("the closed run is parametrised in units of 1/J; J must be positive")
    times = np.linspace(0.0, 10.0, 201) if times is None else np.asarray(times, dtype=float)
    h = build_single_particle_hamiltonian(p, gauge, rotating=rotating)
    prop = HermitianPropagator(h)
    C0 = np.zeros((3, 3), complex)
    C0[initial_site - 1, initial_site - 1] = 1.0
    Cs = np.empty((len(times), 3, 3), complex)
    cur = np.empty((len(times), 3))
    for k, tau in enumerate(times):
        U = prop.at(tau / p.J)
        C = U.conj() @ C0 @ U.T
        Cs[k] = C
        cur[k] = np.array(link_currents(C, h)) / p.J
    return ClosedRun(params=p, initial_site=initial_site, times=times, C=Cs, currents=cur)


__all__ = ["ClosedRun", "DEFAULT_J_OVER_OMEGA", "closed_params", "evolve_closed"]
