"""Zero-mean Gaussian state algebra in a single fixed quadrature convention.

Convention (used everywhere in the package):

    x = (a + a^dag) / 2,    p = (a - a^dag) / 2i,    [x, p] = i/2

The covariance is ``V_lm = <u_l u_m + u_m u_l>`` with ``u = (x_1..x_n, p_1..p_n)``,
so the vacuum has ``V = I/2`` and a thermal mode with occupation ``n`` has
``V = (n + 1/2) I``.  The commutator form ``T_lm = -i <[u_l, u_m]>`` has the
block structure ``[[0, I/2], [-I/2, 0]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError, NumericalError, StabilityError, TruncationError


@dataclass(frozen=True)
class QuadratureConvention:
    """Constants fixing the ladder/quadrature map. There is one instance."""

    x_scale: float = 0.5  # x = x_scale * (a + a^dag)
    commutator: float = 0.5  # [x, p] = i * commutator
    vacuum_variance: float = 0.5  # V_xx of the vacuum


CONVENTION = QuadratureConvention()


def bose_occupation(omega, temperature):
    """Bose-Einstein occupation ``1 / (exp(omega / T) - 1)``; vectorised, 0 at T -> 0+."""
    omega = np.asarray(omega, dtype=float)
    temperature = np.asarray(temperature, dtype=float)
    if np.any(omega <= 0) or np.any(temperature <= 0):
        raise DomainError("bose_occupation needs omega > 0 and T > 0")
    ratio = omega / temperature
    with np.errstate(over="ignore"):
        out = np.where(ratio > 700.0, 0.0, 1.0 / np.expm1(np.minimum(ratio, 700.0)))
    return float(out) if out.ndim == 0 else out


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Commutator form ``T`` in (x..., p...) ordering."""
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return CONVENTION.commutator * np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class GaussianState:
    """Zero-mean Gaussian state given by its symmetric quadrature covariance."""

    cov: NDArray[np.float64] = field(repr=False)

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise DomainError(f"covariance must be 2n x 2n, got {cov.shape}")
        if not np.allclose(cov, cov.T, atol=1e-10 * max(1.0, np.abs(cov).max())):
            raise DomainError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    @classmethod
    def from_correlations(cls, corr, anomalous=None) -> GaussianState:
        """Build from ``C_lm = <a_l^dag a_m>`` and optionally ``M_lm = <a_l a_m>``."""
        corr = np.asarray(corr, dtype=complex)
        n = corr.shape[0]
        anomalous = np.zeros((n, n), complex) if anomalous is None else np.asarray(anomalous, complex)
        half = CONVENTION.vacuum_variance * np.eye(n)
        vxx = half + corr.real + anomalous.real
        vpp = half + corr.real - anomalous.real
        vxp = corr.imag + anomalous.imag
        return cls(np.block([[vxx, vxp], [vxp.T, vpp]]))

    def correlations(self) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        """Return ``(C, M)`` with ``C_lm = <a_l^dag a_m>`` and ``M_lm = <a_l a_m>``."""
        n = self.n_modes
        vxx, vxp = self.cov[:n, :n], self.cov[:n, n:]
        vpp = self.cov[n:, n:]
        half = CONVENTION.vacuum_variance * np.eye(n)
        corr = (0.5 * (vxx + vpp) - half) + 0.5j * (vxp - vxp.T)
        anomalous = 0.5 * (vxx - vpp) + 0.5j * (vxp + vxp.T)
        return corr, anomalous

    def reduced(self, modes) -> GaussianState:
        """Marginal on the listed modes (0-based)."""
        modes = list(modes)
        idx = modes + [m + self.n_modes for m in modes]
        return GaussianState(self.cov[np.ix_(idx, idx)])

    def uncertainty_eigenvalue(self) -> float:
        """Smallest eigenvalue of ``V + iT``; non-negative for physical states."""
        return float(np.linalg.eigvalsh(self.cov + 1j * symplectic_form(self.n_modes)).min())

    def is_physical(self, tol: float = 1e-10) -> bool:
        return self.uncertainty_eigenvalue() >= -tol

    def mean_occupation(self, mode: int = 0) -> float:
        corr, _ = self.correlations()
        return float(corr[mode, mode].real)


def thermal_from_occupation(nbar) -> GaussianState:
    """Product of thermal modes with the given mean occupations."""
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    if np.any(nbar < 0):
        raise DomainError("occupations must be non-negative")
    return GaussianState(np.diag(np.concatenate([nbar, nbar]) + CONVENTION.vacuum_variance))


def thermal_state(omega: float, temperature: float) -> GaussianState:
    """Single-mode thermal state at frequency ``omega`` and temperature ``temperature``."""
    if omega <= 0 or temperature <= 0:
        raise DomainError(f"thermal_state needs omega > 0 and T > 0 (got {omega}, {temperature})")
    return thermal_from_occupation(bose_occupation(omega, temperature))


def solve_lyapunov(A, Q) -> NDArray[np.complex128]:
    """Solve ``A X + X A^dag + Q = 0`` for Hermitian ``X``.

    The system is small, so it is vectorised into an ``n^2 x n^2`` linear solve
    (column-major ``vec``: ``vec(A X) = (I kron A) vec X`` and
    ``vec(X A^dag) = (conj(A) kron I) vec X``).
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    Q = np.atleast_2d(np.asarray(Q, dtype=complex))
    n = A.shape[0]
    if A.shape != (n, n) or Q.shape != (n, n):
        raise DomainError("A and Q must be square and of equal size")
    eig = np.linalg.eigvals(A)
    if np.any(eig.real >= 0):
        raise StabilityError(
            f"no stable steady state: drift eigenvalue with Re = {eig.real.max():.3e} >= 0"
        )
    eye = np.eye(n)
    lhs = np.kron(eye, A) + np.kron(A.conj(), eye)
    try:
        vec = np.linalg.solve(lhs, -Q.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Lyapunov solve failed: {exc}") from exc
    X = vec.reshape((n, n), order="F")
    X = 0.5 * (X + X.conj().T)
    resid = np.linalg.norm(A @ X + X @ A.conj().T + Q)
    scale = np.linalg.norm(A) * np.linalg.norm(X) + np.linalg.norm(Q)
    if resid > 1e-10 * max(scale, 1e-300):
        raise NumericalError(f"Lyapunov residual {resid:.3e} too large (scale {scale:.3e})")
    return X


def _check_hermitian(W, tol: float = 1e-10) -> NDArray[np.complex128]:
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DomainError("matrix must be square")
    dev = np.abs(W - W.conj().T).max() if W.size else 0.0
    if dev > tol * max(1.0, np.abs(W).max()):
        raise DomainError(f"matrix is not Hermitian (deviation {dev:.3e})")
    return 0.5 * (W + W.conj().T)


class HermitianPropagator:
    """``exp(-i W t)`` for a fixed Hermitian ``W`` via one eigendecomposition.

    The decomposition costs O(M^3) once; each later time costs O(M^2 k) for
    ``k`` requested rows.
    """

    def __init__(self, W):
        self.W = _check_hermitian(W)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(self.W)

    def at(self, t: float) -> NDArray[np.complex128]:
        V = self.eigenvectors
        return (V * np.exp(-1j * self.eigenvalues * t)) @ V.conj().T

    def rows(self, rows, t: float) -> NDArray[np.complex128]:
        """Selected rows of ``exp(-i W t)``."""
        V = self.eigenvectors
        return (V[rows, :] * np.exp(-1j * self.eigenvalues * t)) @ V.conj().T


def propagator(W, t: float) -> NDArray[np.complex128]:
    """Unitary ``exp(-i W t)`` of a Hermitian matrix."""
    return HermitianPropagator(W).at(t)


def _marian_squared_fidelity(v1, v2) -> float:
    # Two-mode closed form in the standard normalisation, where our V already
    # equals the symmetrised covariance and the symplectic form is 2T.
    J = 2.0 * symplectic_form(2)
    eye = np.eye(4)
    delta = np.linalg.det(v1 + v2).real
    gamma = 16.0 * np.linalg.det(J @ v1 @ J @ v2 - eye / 4.0).real
    lam = 16.0 * (np.linalg.det(v1 + 0.5j * J) * np.linalg.det(v2 + 0.5j * J)).real
    gamma = max(gamma, 0.0)
    lam = max(lam, 0.0)
    s = math.sqrt(gamma) + math.sqrt(lam)
    return 1.0 / (s - math.sqrt(max(s * s - delta, 0.0)))


def fidelity_two_mode(s1: GaussianState, s2: GaussianState, tol: float = 1e-9) -> float:
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`` of two-mode Gaussian states.

    The closed form yields the squared quantity; its square root is returned.
    The result is symmetrised over argument order.
    """
    for s in (s1, s2):
        if s.n_modes != 2:
            raise DomainError("fidelity_two_mode needs two-mode states")
        if not s.is_physical(tol):
            raise DomainError("covariance violates the uncertainty relation")
    f2 = 0.5 * (_marian_squared_fidelity(s1.cov, s2.cov) + _marian_squared_fidelity(s2.cov, s1.cov))
    return float(min(1.0, max(0.0, math.sqrt(f2))))


def thermal_fock_distribution(nbar: float, cutoff: int) -> NDArray[np.float64]:
    """Geometric number distribution ``p_n = nbar^n / (nbar+1)^(n+1)`` for n <= cutoff."""
    n = np.arange(cutoff + 1)
    if nbar <= 0:
        out = np.zeros(cutoff + 1)
        out[0] = 1.0
        return out
    r = nbar / (nbar + 1.0)
    return np.exp(n * math.log(r)) / (nbar + 1.0)


def fock_distribution(state: GaussianState, cutoff: int) -> NDArray[np.float64]:
    """Number distribution of a zero-mean single-mode Gaussian state, n = 0..cutoff.

    Uses ``sum_n p_n z^n = P(z)^(-1/2)`` with the quadratic
    ``P(z) = (1-z)^2 det V + (1-z^2) tr V / 2 + (1+z)^2 / 4``; the Taylor
    coefficients follow a three-term recurrence.
    """
    if state.n_modes != 1:
        raise DomainError("fock_distribution needs a single-mode state")
    det = float(np.linalg.det(state.cov))
    tr = float(np.trace(state.cov))
    # P(z) = a0 + a1 z + a2 z^2
    a0 = det + 0.5 * tr + 0.25
    a1 = -2.0 * det + 0.5
    a2 = det - 0.5 * tr + 0.25
    f = np.zeros(cutoff + 1)
    f[0] = a0 ** -0.5
    if cutoff >= 1:
        f[1] = -0.5 * a1 * f[0] / a0
    for n in range(1, cutoff):
        f[n + 1] = -(a1 * (n + 0.5) * f[n] + a2 * n * f[n - 1]) / (a0 * (n + 1))
    return np.clip(f, 0.0, None)


@dataclass(frozen=True)
class EffectiveTemperature:
    temperature: float
    trace_distance: float
    anomalous: float
    cutoff: int
    at_lower_bound: bool = False


def _thermal_cutoff(temperature: float, omega: float, tail_tol: float) -> int:
    nbar = bose_occupation(omega, temperature)
    if nbar <= 0:
        return 1
    r = nbar / (nbar + 1.0)
    return max(1, int(math.ceil(math.log(tail_tol) / math.log(r))))


def effective_temperature(
    state: GaussianState,
    omega: float,
    bracket: tuple[float, float] | None = None,
    *,
    rtol: float = 1e-9,
    tail_tol: float = 1e-8,
    cutoff: int | None = None,
) -> EffectiveTemperature:
    """Temperature of the thermal state closest in trace distance to ``state``.

    The trace distance ``D = 1/2 sum_n |p_n - q_n(T)|`` is evaluated on a
    truncated number basis and minimised by golden-section search over
    ``bracket`` (default ``[0.01 omega, 4 max(omega, T_naive)]``).  Reduced
    states with a vanishing anomalous moment are treated as thermal.
    """
    if state.n_modes != 1:
        raise DomainError("effective_temperature needs a single-mode state")
    corr, anom = state.correlations()
    nbar = float(corr[0, 0].real)
    m_abs = float(abs(anom[0, 0]))
    if bracket is None:
        t_naive = omega / math.log1p(1.0 / nbar) if nbar > 1e-300 else omega
        bracket = (0.01 * omega, 4.0 * max(omega, t_naive))
    t_lo, t_hi = map(float, bracket)
    if not 0 < t_lo < t_hi:
        raise DomainError(f"invalid temperature bracket {bracket}")

    if cutoff is None:
        cutoff = _thermal_cutoff(t_hi, omega, tail_tol)
    if m_abs > 1e-10:
        p = fock_distribution(state, cutoff)
    else:
        p = thermal_fock_distribution(nbar, cutoff)
    tail = 1.0 - p.sum()
    if tail > tail_tol:
        need = cutoff
        while need < 100 * (cutoff + 10):
            need = 2 * need
            q = fock_distribution(state, need) if m_abs > 1e-10 else thermal_fock_distribution(nbar, need)
            if 1.0 - q.sum() <= tail_tol:
                break
        raise TruncationError(
            f"Fock cutoff {cutoff} leaves tail mass {tail:.2e} > {tail_tol:.0e}", required_cutoff=need
        )

    def distance(T: float) -> float:
        return 0.5 * float(np.abs(p - thermal_fock_distribution(bose_occupation(omega, T), cutoff)).sum())

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = t_lo, t_hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = distance(c), distance(d)
    while (b - a) > rtol * (a + b) / 2:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = distance(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = distance(d)
    T = 0.5 * (a + b)
    at_lo = T <= t_lo * (1.0 + 10 * rtol) + 1e-300
    return EffectiveTemperature(
        temperature=t_lo if at_lo else T,
        trace_distance=distance(T),
        anomalous=m_abs,
        cutoff=cutoff,
        at_lower_bound=at_lo,
    )
