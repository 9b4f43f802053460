"""Exact unitary dynamics of the loop coupled to finite, discretised ohmic baths.

The composite Hamiltonian is quadratic and number conserving, so the ladder
operators evolve as ``a(t) = exp(-i W t) a(0)`` for a single-particle matrix
``W`` of size ``M = 2N + 3``.  The mode layout is

    a_2, hot bath (N modes), a_1, a_3, cold bath (N modes)

with the cold bath coupled to both ``a_1`` and ``a_3``.  With
``independent_cold=True`` a third bath of N modes is appended and ``a_3``
couples to it instead; this variant is a diagnostic, not the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError, QuasiSteadyError
from .gaussian import GaussianState, HermitianPropagator, bose_occupation
from .model import LinkPhaseAssignment, TrimerParams, build_single_particle_hamiltonian, link_currents


@dataclass(frozen=True)
class BathDiscretization:
    """``N`` modes at ``omega_j = j omega_c / N`` with ``g_j = sqrt(j gamma / (2 pi omega)) omega_c / N``."""

    gamma: float
    omega: float
    omega_c: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("a bath needs at least one mode")
        if not self.omega_c > 0 or not self.omega > 0:
            raise DomainError("omega and omega_c must be positive")
        if self.gamma < 0:
            raise DomainError("gamma must be non-negative")

    @property
    def frequencies(self) -> NDArray[np.float64]:
        return np.arange(1, self.n + 1) * (self.omega_c / self.n)

    @property
    def couplings(self) -> NDArray[np.float64]:
        j = np.arange(1, self.n + 1)
        return np.sqrt(j * self.gamma / (2 * math.pi * self.omega)) * (self.omega_c / self.n)

    @property
    def recurrence_time(self) -> float:
        """``2 pi / (mode spacing)``: when the discrete bath starts to echo."""
        return 2 * math.pi * self.n / self.omega_c


def discretize_bath(gamma: float, omega: float, omega_c: float = 3.0, n: int = 400) -> BathDiscretization:
    return BathDiscretization(gamma=gamma, omega=omega, omega_c=omega_c, n=n)


def default_baths(p: TrimerParams, omega_c: float | None = None, n: int = 400):
    """Hot and cold baths with the usual ``omega_c = 3 omega``."""
    wc = 3.0 * p.omega if omega_c is None else omega_c
    b = discretize_bath(p.gamma, p.omega, wc, n)
    return b, b


class CompositeModel:
    """Single-particle matrix of system plus baths, with its eigendecomposition cached."""

    def __init__(
        self,
        params: TrimerParams,
        hot: BathDiscretization,
        cold: BathDiscretization,
        gauge: LinkPhaseAssignment | None = None,
        *,
        independent_cold: bool = False,
    ):
        self.params = params
        self.hot = hot
        self.cold = cold
        self.independent_cold = independent_cold
        self.h_system = build_single_particle_hamiltonian(params, gauge)
        Nh, Nc = hot.n, cold.n
        self.hot_modes = np.arange(1, Nh + 1)
        a1, a3 = Nh + 1, Nh + 2
        self.system_modes = np.array([a1, 0, a3])  # sites 1, 2, 3
        start = Nh + 3
        if independent_cold:
            self.cold_modes = (np.arange(start, start + Nc), np.arange(start + Nc, start + 2 * Nc))
        else:
            self.cold_modes = (np.arange(start, start + Nc),)
        M = start + Nc * len(self.cold_modes)
        W = np.zeros((M, M), complex)
        s = self.system_modes
        W[np.ix_(s, s)] = self.h_system
        W[self.hot_modes, self.hot_modes] = hot.frequencies
        W[0, self.hot_modes] = W[self.hot_modes, 0] = hot.couplings
        eps = params.epsilon
        scale = (math.sqrt(1 + eps), math.sqrt(1 - eps))
        for k, site in enumerate((a1, a3)):
            modes = self.cold_modes[k] if independent_cold else self.cold_modes[0]
            W[modes, modes] = cold.frequencies
            W[site, modes] = W[modes, site] = scale[k] * cold.couplings
        self.W = W

    @property
    def n_modes(self) -> int:
        return self.W.shape[0]

    @cached_property
    def propagator(self) -> HermitianPropagator:
        return HermitianPropagator(self.W)

    def initial_occupations(self) -> NDArray[np.float64]:
        """Product of thermal states: sites at their bath temperature and frequency omega."""
        p = self.params
        n0 = np.zeros(self.n_modes)
        n0[self.system_modes] = p.bath_occupations
        n0[self.hot_modes] = bose_occupation(self.hot.frequencies, p.T_hot)
        for modes in self.cold_modes:
            n0[modes] = bose_occupation(self.cold.frequencies, p.T_cold)
        return n0

    def system_correlations(self, t: float) -> NDArray[np.complex128]:
        """``<a_l^dag a_m>(t)`` for the sites, from the ladder-operator propagator."""
        U = self.propagator.rows(self.system_modes, t)
        C = (U.conj() * self.initial_occupations()) @ U.T
        return 0.5 * (C + C.conj().T)

    def currents(self, t: float) -> tuple[float, float, float]:
        return link_currents(self.system_correlations(t), self.h_system)


def build_composite(
    p: TrimerParams,
    hot: BathDiscretization | None = None,
    cold: BathDiscretization | None = None,
    gauge: LinkPhaseAssignment | None = None,
    *,
    independent_cold: bool = False,
) -> CompositeModel:
    if hot is None or cold is None:
        dh, dc = default_baths(p)
        hot = hot or dh
        cold = cold or dc
    return CompositeModel(p, hot, cold, gauge, independent_cold=independent_cold)


def initial_covariance(model: CompositeModel) -> NDArray[np.float64]:
    """Quadrature covariance ``(x..., p...)`` of the initial product state."""
    n0 = model.initial_occupations()
    return np.diag(np.concatenate([n0, n0]) + 0.5)


def symplectic_propagator(model: CompositeModel, t: float) -> NDArray[np.float64]:
    """``[[psi_R, -psi_I], [psi_I, psi_R]]`` with ``exp(-i W t) = psi_R + i psi_I``."""
    U = model.propagator.at(t)
    R, I = U.real, U.imag
    return np.block([[R, -I], [I, R]])


def propagate(cov, model: CompositeModel, t: float) -> NDArray[np.float64]:
    if t < 0:
        raise DomainError("propagation time must be non-negative")
    if t == 0:
        return np.array(cov, dtype=float)
    S = symplectic_propagator(model, t)
    out = S @ np.asarray(cov) @ S.T
    return 0.5 * (out + out.T)


def extract_system_correlations(cov, model: CompositeModel) -> NDArray[np.complex128]:
    C, _ = GaussianState(np.asarray(cov)).reduced(model.system_modes).correlations()
    return C


@dataclass(frozen=True)
class QuasiSteadyResult:
    currents: tuple[float, float, float]  # (J21, J23, J13)
    C: NDArray[np.complex128]
    tau_ss: float
    tau_rec: float
    recurrence_ok: bool
    window: tuple[float, float]
    drift: tuple[float, float, float]  # max - min of each current over the window
    relative_drift: float
    n_modes: int
    samples: NDArray[np.float64] = field(repr=False)

    @property
    def J21(self) -> float:
        return self.currents[0]

    @property
    def J23(self) -> float:
        return self.currents[1]

    @property
    def J13(self) -> float:
        return self.currents[2]


def quasi_steady_currents(
    p: TrimerParams,
    hot: BathDiscretization | None = None,
    cold: BathDiscretization | None = None,
    tau_ss: float | None = None,
    *,
    gauge: LinkPhaseAssignment | None = None,
    model: CompositeModel | None = None,
    independent_cold: bool = False,
    window: float | None = None,
    n_samples: int = 6,
    drift_tol: float = 0.1,
    check: bool = True,
) -> QuasiSteadyResult:
    """Currents at ``tau_ss`` (default ``6/gamma``) after starting from the product state.

    The plateau is judged over ``[tau_ss - window, tau_ss]`` (window ``1/gamma``):
    the spread of each current, relative to the largest current magnitude,
    must stay below ``drift_tol``.  The run must also finish before
    ``0.8 tau_rec``.  With ``check=False`` both conditions are only reported.
    """
    if p.gamma <= 0:
        raise DomainError("a quasi-steady state needs gamma > 0")
    if model is None:
        model = build_composite(p, hot, cold, gauge, independent_cold=independent_cold)
    tau_ss = 6.0 / p.gamma if tau_ss is None else float(tau_ss)
    window = 1.0 / p.gamma if window is None else float(window)
    tau_rec = min(model.hot.recurrence_time, model.cold.recurrence_time)
    recurrence_ok = tau_ss <= 0.8 * tau_rec
    n_bath = max(model.hot.n, model.cold.n)
    if check and not recurrence_ok:
        wc = min(model.hot.omega_c, model.cold.omega_c)
        need = math.ceil(tau_ss * wc / (0.8 * 2 * math.pi))
        raise QuasiSteadyError(
            f"tau_ss = {tau_ss:.4g} exceeds 0.8 x recurrence time {tau_rec:.4g} for N = {n_bath}",
            suggested_modes=need,
        )
    t0 = max(tau_ss - window, 0.0)
    times = np.linspace(t0, tau_ss, n_samples)
    samples = np.array([model.currents(t) for t in times])
    final = tuple(float(x) for x in samples[-1])
    drift = tuple(float(x) for x in np.ptp(samples, axis=0))
    scale = float(np.abs(samples[-1]).max())
    rel = max(drift) / scale if scale > 0 else 0.0
    if check and rel > drift_tol:
        raise QuasiSteadyError(
            f"currents drift by {rel:.1%} over [{t0:.4g}, {tau_ss:.4g}]; no plateau",
            suggested_modes=2 * n_bath,
        )
    return QuasiSteadyResult(
        currents=final,
        C=model.system_correlations(tau_ss),
        tau_ss=tau_ss,
        tau_rec=tau_rec,
        recurrence_ok=recurrence_ok,
        window=(t0, tau_ss),
        drift=drift,
        relative_drift=rel,
        n_modes=model.n_modes,
        samples=samples,
    )


__all__ = [
    "BathDiscretization",
    "CompositeModel",
    "QuasiSteadyResult",
    "build_composite",
    "default_baths",
    "discretize_bath",
    "extract_system_correlations",
    "initial_covariance",
    "propagate",
    "quasi_steady_currents",
    "symplectic_propagator",
]
