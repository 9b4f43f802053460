"""The three-oscillator loop: parameters, hopping matrix, link currents, hybrid modes.

Sites are labelled 1, 2, 3 in the public API and stored 0, 1, 2 in arrays.
Site 2 touches the hot bath; sites 1 and 3 touch the cold bath.

The hopping Hamiltonian is ``sum_lm J_lm (e^{i theta_lm} a_l^dag a_m + h.c.)``
over the links (1,2), (2,3), (3,1), and the loop phase is
``theta = theta_12 + theta_23 + theta_31``.  The default gauge puts the whole
phase on the 1-3 link (``theta_31 = theta``), so the single-particle matrix has
``h[1,3] = J e^{-i theta}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError, UnsupportedConfigurationError
from .gaussian import bose_occupation

LINKS = ((2, 1), (2, 3), (1, 3))


@dataclass(frozen=True)
class TrimerParams:
    """Physical parameters, with hbar = k_B = 1.

    ``delta`` skews the hoppings (J_21 = J(1+delta), J_23 = J(1-delta)) and
    ``epsilon`` skews the cold-side damping (gamma_1 = gamma(1+epsilon),
    gamma_3 = gamma(1-epsilon)).
    """

    J: float
    theta: float = 0.0
    gamma: float = 0.03
    T_hot: float = 5.0
    T_cold: float = 3.0
    omega: float = 1.0
    delta: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError("omega must be positive")
        if self.J < 0 or self.gamma < 0:
            raise DomainError("J and gamma must be non-negative")
        if not (self.T_hot > 0 and self.T_cold > 0):
            raise DomainError("bath temperatures must be positive")
        if abs(self.delta) >= 1 or abs(self.epsilon) >= 1:
            raise DomainError("|delta| and |epsilon| must be < 1")

    @classmethod
    def from_ratio(cls, J_over_gamma: float, **kwargs) -> TrimerParams:
        gamma = kwargs.pop("gamma", 0.03)
        return cls(J=J_over_gamma * gamma, gamma=gamma, **kwargs)

    def with_(self, **changes) -> TrimerParams:
        return replace(self, **changes)

    @property
    def J_over_gamma(self) -> float:
        return self.J / self.gamma

    @property
    def hoppings(self) -> dict[tuple[int, int], float]:
        """Amplitudes J_lm keyed by unordered link, both orders present."""
        j12 = self.J * (1 + self.delta)
        j23 = self.J * (1 - self.delta)
        j13 = self.J
        return {(1, 2): j12, (2, 1): j12, (2, 3): j23, (3, 2): j23, (1, 3): j13, (3, 1): j13}

    @property
    def gammas(self) -> NDArray[np.float64]:
        g = self.gamma
        return np.array([g * (1 + self.epsilon), g, g * (1 - self.epsilon)])

    @property
    def n_hot(self) -> float:
        return bose_occupation(self.omega, self.T_hot)

    @property
    def n_cold(self) -> float:
        return bose_occupation(self.omega, self.T_cold)

    @property
    def bath_occupations(self) -> NDArray[np.float64]:
        """Bose occupation of the bath each site touches, in site order."""
        return np.array([self.n_cold, self.n_hot, self.n_cold])

    @property
    def bath_temperatures(self) -> NDArray[np.float64]:
        return np.array([self.T_cold, self.T_hot, self.T_cold])


@dataclass(frozen=True)
class LinkPhaseAssignment:
    theta_12: float = 0.0
    theta_23: float = 0.0
    theta_31: float = 0.0

    @property
    def total(self) -> float:
        return self.theta_12 + self.theta_23 + self.theta_31

    def check(self, theta: float, tol: float = 1e-10) -> None:
        diff = math.remainder(self.total - theta, 2 * math.pi)
        if abs(diff) > tol:
            raise DomainError(f"link phases sum to {self.total}, loop phase is {theta}")


def default_gauge(theta: float) -> LinkPhaseAssignment:
    return LinkPhaseAssignment(theta_31=theta)


def _resolve_gauge(p: TrimerParams, gauge: LinkPhaseAssignment | None) -> LinkPhaseAssignment:
    if gauge is None:
        return default_gauge(p.theta)
    gauge.check(p.theta)
    return gauge


def build_single_particle_hamiltonian(
    p: TrimerParams, gauge: LinkPhaseAssignment | None = None, *, rotating: bool = False
) -> NDArray[np.complex128]:
    """Hermitian ``h`` with ``H = sum_lm a_l^dag h_lm a_m``.

    ``rotating=True`` drops the common on-site frequency.
    """
    g = _resolve_gauge(p, gauge)
    J = p.hoppings
    h = np.zeros((3, 3), complex)
    for (l, m), phase in (((1, 2), g.theta_12), ((2, 3), g.theta_23), ((3, 1), g.theta_31)):
        amp = J[(l, m)] * np.exp(1j * phase)
        h[l - 1, m - 1] = amp
        h[m - 1, l - 1] = np.conj(amp)
    if not rotating:
        h += p.omega * np.eye(3)
    return h


def link_current(corr, h, link: tuple[int, int]) -> float:
    """``<J_lm> = i(h_lm C_lm - c.c.) = -2 Im(h_lm C_lm)``; positive means l -> m."""
    l, m = link
    if l == m or not ({l, m} <= {1, 2, 3}):
        raise DomainError(f"invalid link {link}")
    return float(-2.0 * np.imag(h[l - 1, m - 1] * corr[l - 1, m - 1]))


def link_currents(corr, h) -> tuple[float, float, float]:
    """``(J_21, J_23, J_13)`` for a 3x3 correlation matrix."""
    return tuple(link_current(corr, h, link) for link in LINKS)


def current_expectation(
    corr, link: tuple[int, int], p: TrimerParams, gauge: LinkPhaseAssignment | None = None
) -> float:
    if tuple(link) not in LINKS:
        raise DomainError(f"link must be one of {LINKS}")
    return link_current(np.asarray(corr), build_single_particle_hamiltonian(p, gauge), tuple(link))


@dataclass(frozen=True)
class HybridModeData:
    omega_plus: float
    omega_minus: float
    J_plus: complex
    J_minus: complex


def _hybrid_phase(p: TrimerParams) -> float:
    # phase of h[1,3] in the default gauge
    return -p.theta


def hybrid_mode_data(p: TrimerParams) -> HybridModeData:
    """Frequencies and site-2 couplings of ``A_+ = (a1 + e^{i phi} a3)/sqrt2``,
    ``A_- = (a3 - e^{-i phi} a1)/sqrt2`` with ``phi = arg h_13``."""
    if p.delta != 0:
        raise UnsupportedConfigurationError("hybrid modes are defined for symmetric hopping only")
    phi = _hybrid_phase(p)
    s = math.sqrt(2.0)
    return HybridModeData(
        omega_plus=p.omega + p.J,
        omega_minus=p.omega - p.J,
        J_plus=p.J * (1 + np.exp(-1j * phi)) / s,
        J_minus=p.J * (1 - np.exp(1j * phi)) / s,
    )


def hybrid_transform(p: TrimerParams) -> NDArray[np.complex128]:
    """Unitary ``U`` with ``(a2, A_+, A_-)_k = sum_l U_kl a_l`` (sites in order 1, 2, 3)."""
    phi = _hybrid_phase(p)
    s = 1 / math.sqrt(2.0)
    return np.array(
        [
            [0, 1, 0],
            [s, 0, s * np.exp(1j * phi)],
            [-s * np.exp(-1j * phi), 0, s],
        ],
        dtype=complex,
    )


def to_hybrid_basis(corr, p: TrimerParams) -> NDArray[np.complex128]:
    """``<A_k^dag A_j>`` from the site-basis ``<a_l^dag a_m>``."""
    U = hybrid_transform(p)
    return U.conj() @ np.asarray(corr) @ U.T


def current_13_hybrid(corr_hybrid, p: TrimerParams, tol: float = 1e-12) -> float:
    """``<J_13>`` from the hybrid-basis correlations: ``-2 J Im(e^{i phi} <A_+^dag A_->)``."""
    if p.delta != 0:
        raise UnsupportedConfigurationError("hybrid modes are defined for symmetric hopping only")
    U = hybrid_transform(p)
    if np.abs(U @ U.conj().T - np.eye(3)).max() > tol:
        raise DomainError("site-to-hybrid map is not unitary")
    corr_hybrid = np.asarray(corr_hybrid)
    if np.abs(corr_hybrid - corr_hybrid.conj().T).max() > 1e-10 * max(1.0, np.abs(corr_hybrid).max()):
        raise DomainError("hybrid correlation matrix is not Hermitian")
    phi = _hybrid_phase(p)
    return float(-2.0 * p.J * np.imag(np.exp(1j * phi) * corr_hybrid[1, 2]))


def approx_current_13(p: TrimerParams) -> float:
    """Weak-coupling estimate ``2 J (N_H - N_C) (J/gamma)^2 sin(theta)``."""
    return 2.0 * p.J * (p.n_hot - p.n_cold) * (p.J / p.gamma) ** 2 * math.sin(p.theta)
