from __future__ import annotations

import math

import numpy as np
import pytest

from trimerheat import kernels
from trimerheat.errors import TruncationError
from trimerheat.fock import (
    FockConfig,
    FockLindblad,
    choose_cutoff,
    integrate_single_mode,
    integrate_to_steady,
    product_trace_distance,
    truncated_thermal_mean,
)
from trimerheat.lindblad import steady_correlations, steady_state
from trimerheat.model import TrimerParams

LOW_T = TrimerParams.from_ratio(0.3, theta=math.pi / 2, T_hot=0.4, T_cold=0.25)


def _random_rho(basis, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)


def _dense_lindblad(n_max, h, loss, gain, rho_packed, basis):
    """Reference: full (n_max+1)^3 dense superoperator action."""
    d = n_max + 1
    a1 = np.diag(np.sqrt(np.arange(1, d)), 1)
    I = np.eye(d)
    a = [np.kron(np.kron(a1, I), I), np.kron(np.kron(I, a1), I), np.kron(np.kron(I, I), a1)]
    H = sum(h[l, m] * a[l].conj().T @ a[m] for l in range(3) for m in range(3) if l != m)
    dim = d**3
    # full state index of basis state k: n1 * d^2 + n2 * d + n3
    full = basis.occ @ np.array([d * d, d, 1])
    rho = np.zeros((dim, dim), complex)
    rows, cols = basis.elements
    rho[full[rows], full[cols]] = rho_packed

    def D(L, r):
        return L @ r @ L.conj().T - 0.5 * (L.conj().T @ L @ r + r @ L.conj().T @ L)

    out = -1j * (H @ rho - rho @ H)
    for l in range(3):
        out += loss[l] * D(a[l], rho) + gain[l] * D(a[l].conj().T, rho)
    return out[full[rows], full[cols]]


def test_sector_basis_sizes():
    expected = {3: 580, 4: 1751, 5: 4332, 6: 9331}
    for n, size in expected.items():
        b = kernels.SectorBasis(n)
        assert b.size == size
        assert b.n_states == (n + 1) ** 3
        assert sum(blk.size for blk in b.blocks(np.zeros(b.size))) == size


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_rhs_matches_dense_superoperator(backend):
    b = kernels.SectorBasis(3)
    h = np.array([[0, 0.3, 0.2j], [0.3, 0, 0.5], [-0.2j, 0.5, 0]])
    loss, gain = np.array([0.1, 0.2, 0.3]), np.array([0.05, 0.01, 0.02])
    rho = _random_rho(b)
    got = kernels.LindbladRHS(b, h, loss, gain, backend=backend)(rho)
    np.testing.assert_allclose(got, _dense_lindblad(3, h, loss, gain, rho, b), atol=1e-12)


@pytest.mark.skipif("compiled" not in kernels.available_backends(), reason="extension not built")
def test_compiled_and_python_backends_agree():
    b = kernels.SectorBasis(6)
    rng = np.random.default_rng(4)
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = X + X.conj().T
    loss, gain = rng.uniform(0, 1, 3), rng.uniform(0, 1, 3)
    rho = _random_rho(b, 1)
    c = kernels.LindbladRHS(b, h, loss, gain, backend="compiled")(rho)
    p = kernels.LindbladRHS(b, h, loss, gain, backend="python")(rho)
    np.testing.assert_allclose(c, p, atol=1e-12)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.LindbladRHS(kernels.SectorBasis(1), np.zeros((3, 3)), np.zeros(3), np.zeros(3), backend="gpu")


def test_rhs_is_trace_preserving_and_hermiticity_preserving():
    gen = FockLindblad(np.array([[0, 1, 1j], [1, 0, 1], [-1j, 1, 0]]), [0.3, 0.2, 0.1], [0.2, 0.5, 0.1], 4)
    b = gen.basis
    rho = _random_rho(b, 2)
    # hermitise block by block
    herm = np.concatenate([(0.5 * (x + x.conj().T)).ravel() for x in b.blocks(rho)])
    out = gen.rhs(herm)
    assert abs(out[b.diagonal_positions].sum()) < 1e-12
    for blk in b.blocks(out):
        assert np.abs(blk - blk.conj().T).max() < 1e-12


def test_choose_cutoff():
    nb = 1 / math.expm1(1 / 0.4)
    n = choose_cutoff(nb, 1e-9)
    r = nb / (nb + 1)
    assert r ** (n + 1) < 1e-9 <= r**n
    assert n == 8
    with pytest.raises(TruncationError) as info:
        choose_cutoff(4.5, 1e-9)
    assert info.value.required_cutoff > 15


def test_explicit_cutoff_below_tail_tolerance_is_rejected():
    with pytest.raises(TruncationError) as info:
        integrate_to_steady(LOW_T, cfg=FockConfig(cutoff=4))
    assert info.value.required_cutoff == 8


def test_single_mode_relaxes_to_truncated_thermal():
    n = integrate_single_mode(0.1, 0.1, 6)
    assert n == pytest.approx(truncated_thermal_mean(0.1, 6), abs=1e-8)
    assert n == pytest.approx(0.1, abs=1e-6)


def test_uncoupled_trimer_is_thermal_product():
    p = LOW_T.with_(J=0.0)
    res = integrate_to_steady(p)
    gen = FockLindblad(np.zeros((3, 3)), p.gammas, p.bath_occupations, res.cutoff)
    assert product_trace_distance(res.rho, gen, p.bath_occupations) < 1e-8


@pytest.fixture(scope="module")
def low_t_oracle():
    return integrate_to_steady(LOW_T)


def test_oracle_matches_lyapunov(low_t_oracle):
    res = low_t_oracle
    np.testing.assert_allclose(res.C, steady_correlations(LOW_T), atol=1e-6)
    assert res.residual < 1e-10
    assert res.max_trace_error < 1e-10
    assert res.max_hermiticity_error < 1e-12
    assert res.min_eigenvalue > -1e-9
    assert res.tail_mass < 1e-9


def test_oracle_heat_currents_match_formula(low_t_oracle):
    rep = steady_state(LOW_T, with_temperatures=False)
    scale = LOW_T.gamma * LOW_T.omega
    np.testing.assert_allclose(low_t_oracle.heat_currents, rep.heat_currents, atol=1e-8 * scale)


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_oracle_backend_independent(backend):
    p = LOW_T.with_(T_hot=0.3, T_cold=0.2, theta=1.0)
    res = integrate_to_steady(p, cfg=FockConfig(backend=backend))
    np.testing.assert_allclose(res.C, steady_correlations(p), atol=1e-6)
