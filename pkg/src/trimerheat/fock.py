"""Brute-force Lindblad integration on a truncated number basis.

This is the independent check on the Gaussian steady-state solver.  The
density operator is evolved under the full master equation with an explicit
adaptive Runge-Kutta scheme.  The Hamiltonian and both jump operators
conserve the difference between bra and ket total number, so a state that
starts diagonal in total number stays block-diagonal; only those blocks are
stored (see :class:`~trimerheat.kernels.SectorBasis`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DomainError, TruncationError
from .kernels import LindbladRHS, SectorBasis
from .model import LinkPhaseAssignment, TrimerParams, build_single_particle_hamiltonian


@dataclass(frozen=True)
class FockConfig:
    cutoff: int | None = None  # n_max per mode; None picks it from tail_tol
    tail_tol: float = 1e-9
    max_dim: int = 4096  # cap on (n_max + 1)^3
    steady_tol: float = 1e-10  # on ||d rho/dt||, Frobenius
    chunk: float = 5.0  # integration chunk, in units of 1/min(gamma_l)
    horizon: float = 400.0  # give up after this many 1/min(gamma_l)
    rtol: float = 1e-10
    atol: float = 1e-13
    backend: str | None = None


@dataclass(frozen=True)
class FockResult:
    C: NDArray[np.complex128]
    heat_currents: NDArray[np.float64]
    occupations: NDArray[np.float64]
    cutoff: int
    tail_mass: float
    time: float
    residual: float
    max_trace_error: float
    min_eigenvalue: float
    max_hermiticity_error: float
    rho: NDArray[np.complex128]


def thermal_tail(nbar: float, n_max: int) -> float:
    """Probability of occupation above ``n_max`` in a thermal mode."""
    if nbar <= 0:
        return 0.0
    return (nbar / (nbar + 1.0)) ** (n_max + 1)


def choose_cutoff(nbar_max: float, tail_tol: float, max_dim: int = 4096) -> int:
    n_max = 1
    while thermal_tail(nbar_max, n_max) >= tail_tol:
        n_max += 1
    if (n_max + 1) ** 3 > max_dim:
        raise TruncationError(
            f"tail mass {tail_tol:.0e} needs n_max = {n_max}, above the dimension cap {max_dim}",
            required_cutoff=n_max,
        )
    return n_max


class FockLindblad:
    """Master-equation generator for three modes with local thermal dissipators."""

    def __init__(self, h, gammas, occupations, n_max: int, backend: str | None = None):
        self.h = np.asarray(h, dtype=complex)
        self.gammas = np.asarray(gammas, dtype=float)
        self.occupations = np.asarray(occupations, dtype=float)
        self.basis = SectorBasis(n_max)
        self.loss = self.gammas * (self.occupations + 1.0)
        self.gain = self.gammas * self.occupations
        self.rhs = LindbladRHS(self.basis, self.h, self.loss, self.gain, backend=backend)

    def product_thermal(self, nbars) -> NDArray[np.complex128]:
        """Packed product of (truncated, renormalised) thermal states."""
        b = self.basis
        probs = np.ones(b.n_states)
        for l, nbar in enumerate(nbars):
            k = b.occ[:, l]
            probs *= (nbar / (nbar + 1.0)) ** k / (nbar + 1.0) if nbar > 0 else (k == 0)
        rho = np.zeros(b.size, complex)
        rho[b.diagonal_positions] = probs / probs.sum()
        return rho

    def trace(self, rho) -> complex:
        return complex(rho[self.basis.diagonal_positions].sum())

    def correlations(self, rho) -> NDArray[np.complex128]:
        """``C_lm = Tr(rho a_l^dag a_m)``."""
        b = self.basis
        s = np.arange(b.n_states)
        C = np.zeros((3, 3), complex)
        diag = rho[b.diagonal_positions]
        for l in range(3):
            C[l, l] = np.sum(b.occ[:, l] * diag)
            for m in range(3):
                if l == m:
                    continue
                k = b.hop_idx[l, m]
                ok = k >= 0
                # <s| a_l^dag a_m |k> rho[k, s]
                C[l, m] = np.sum(b.hop_amp[l, m, ok] * rho[b.position(k[ok], s[ok])])
        return C

    def local_dissipator(self, rho, site: int) -> NDArray[np.complex128]:
        """``D_site(rho)`` alone (0-based site)."""
        loss = np.zeros(3)
        gain = np.zeros(3)
        loss[site] = self.loss[site]
        gain[site] = self.gain[site]
        op = LindbladRHS(self.basis, np.zeros((3, 3)), loss, gain, backend=self.rhs.backend)
        return op(rho)

    def heat_currents(self, rho, omega: float) -> NDArray[np.float64]:
        """``Tr{omega n_l D_l(rho)}`` evaluated directly on the truncated basis."""
        b = self.basis
        out = np.zeros(3)
        for l in range(3):
            d = self.local_dissipator(rho, l)[b.diagonal_positions]
            out[l] = omega * float(np.sum(b.occ[:, l] * d).real)
        return out

    def block_checks(self, rho) -> tuple[float, float]:
        """Smallest eigenvalue and largest anti-Hermitian part over the sector blocks."""
        lam = np.inf
        herm = 0.0
        for blk in self.basis.blocks(rho):
            if blk.size == 0:
                continue
            herm = max(herm, float(np.abs(blk - blk.conj().T).max()))
            lam = min(lam, float(np.linalg.eigvalsh(0.5 * (blk + blk.conj().T)).min()))
        return lam, herm


def integrate_to_steady(
    p: TrimerParams, gauge: LinkPhaseAssignment | None = None, cfg: FockConfig | None = None
) -> FockResult:
    """Evolve the master equation from the bath-temperature product state to stationarity."""
    cfg = cfg or FockConfig()
    if p.gamma <= 0:
        raise DomainError("the oracle needs gamma > 0")
    nb = p.bath_occupations
    nbar_max = float(nb.max())
    if cfg.cutoff is None:
        n_max = choose_cutoff(nbar_max, cfg.tail_tol, cfg.max_dim)
    else:
        n_max = cfg.cutoff
        if (n_max + 1) ** 3 > cfg.max_dim:
            raise TruncationError(f"cutoff {n_max} exceeds the dimension cap {cfg.max_dim}")
        tail = thermal_tail(nbar_max, n_max)
        if tail >= cfg.tail_tol:
            raise TruncationError(
                f"cutoff {n_max} leaves thermal tail mass {tail:.2e} >= {cfg.tail_tol:.0e}",
                required_cutoff=choose_cutoff(nbar_max, cfg.tail_tol, 10**12),
            )
    h = build_single_particle_hamiltonian(p, gauge, rotating=True)
    gen = FockLindblad(h, p.gammas, nb, n_max, backend=cfg.backend)
    return _integrate(gen, gen.product_thermal(nb), p.omega, cfg, thermal_tail(nbar_max, n_max))


def _integrate(gen: FockLindblad, rho0, omega: float, cfg: FockConfig, tail: float) -> FockResult:
    g_min = float(gen.gammas[gen.gammas > 0].min())
    chunk = cfg.chunk / g_min
    horizon = cfg.horizon / g_min

    def f(_t, y):
        return gen.rhs(y)

    rho = rho0
    t = 0.0
    trace_err = abs(gen.trace(rho) - 1.0)
    min_eig, herm = gen.block_checks(rho)
    while True:
        sol = solve_ivp(f, (t, t + chunk), rho, method="DOP853", rtol=cfg.rtol, atol=cfg.atol)
        if not sol.success:
            raise ConvergenceError(f"integrator failed at t = {t:.3g}: {sol.message}")
        rho = sol.y[:, -1]
        t += chunk
        trace_err = max(trace_err, abs(gen.trace(rho) - 1.0))
        lam, hm = gen.block_checks(rho)
        min_eig, herm = min(min_eig, lam), max(herm, hm)
        residual = float(np.linalg.norm(gen.rhs(rho)))
        if residual < cfg.steady_tol:
            break
        if t >= horizon:
            raise ConvergenceError(
                f"||d rho/dt|| = {residual:.2e} after t = {t:.3g}; not stationary"
            )
    C = gen.correlations(rho)
    C = 0.5 * (C + C.conj().T)
    return FockResult(
        C=C,
        heat_currents=gen.heat_currents(rho, omega),
        occupations=np.real(np.diag(C)).copy(),
        cutoff=gen.basis.n_max,
        tail_mass=tail,
        time=t,
        residual=residual,
        max_trace_error=trace_err,
        min_eigenvalue=min_eig,
        max_hermiticity_error=herm,
        rho=rho,
    )


def integrate_single_mode(gamma: float, nbar: float, cutoff: int, cfg: FockConfig | None = None) -> float:
    """Steady mean occupation of one damped mode on levels ``0..cutoff``.

    Embedded in the three-mode basis with the other two modes at zero
    temperature, where they stay in vacuum exactly.
    """
    cfg = cfg or FockConfig()
    gen = FockLindblad(np.zeros((3, 3)), [gamma, gamma, gamma], [nbar, 0.0, 0.0], cutoff, backend=cfg.backend)
    res = _integrate(gen, gen.product_thermal([0.0, 0.0, 0.0]), 1.0, cfg, thermal_tail(nbar, cutoff))
    return float(res.C[0, 0].real)


def truncated_thermal_mean(nbar: float, cutoff: int) -> float:
    """Mean of the geometric distribution restricted to ``0..cutoff``."""
    r = nbar / (nbar + 1.0)
    n = np.arange(cutoff + 1)
    w = r**n
    return float(np.sum(n * w) / np.sum(w))


def product_trace_distance(rho, gen: FockLindblad, nbars) -> float:
    """Trace distance between a packed state and the truncated thermal product."""
    ref = gen.product_thermal(nbars)
    return 0.5 * sum(
        float(np.abs(np.linalg.eigvalsh(a - b)).sum()) for a, b in zip(gen.basis.blocks(rho), gen.basis.blocks(ref))
    )


__all__ = [
    "FockConfig",
    "FockResult",
    "FockLindblad",
    "choose_cutoff",
    "integrate_to_steady",
    "integrate_single_mode",
    "truncated_thermal_mean",
    "product_trace_distance",
    "thermal_tail",
]
