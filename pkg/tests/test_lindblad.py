from __future__ import annotations

import math

import numpy as np
import pytest

from trimerheat.errors import StabilityError
from trimerheat.lindblad import (
    drift_and_diffusion,
    entropy_production,
    heat_currents,
    steady_correlations,
    steady_state,
)
from trimerheat.model import TrimerParams, build_single_particle_hamiltonian, link_current

FIG3 = TrimerParams.from_ratio(0.1)


def random_params(rng, **kw):
    base = dict(
        theta=rng.uniform(0, 2 * math.pi),
        delta=rng.uniform(-0.3, 0.3),
        epsilon=rng.uniform(-0.3, 0.3),
    )
    base.update(kw)
    return TrimerParams.from_ratio(rng.uniform(0.05, 1.0), **base)


def test_decoupled_mode_relaxes_to_bath():
    p = FIG3.with_(J=0.0)
    A, Q = drift_and_diffusion(p)
    assert A[0, 0] == pytest.approx(-p.gamma / 2)
    C = steady_correlations(p)
    np.testing.assert_allclose(np.diag(C).real, p.bath_occupations, rtol=1e-12)


def test_drift_is_hurwitz():
    A, _ = drift_and_diffusion(TrimerParams.from_ratio(1.0, theta=1.0, epsilon=0.2))
    assert np.linalg.eigvals(A).real.max() < 0


def test_zero_damping_has_no_steady_state():
    with pytest.raises(StabilityError):
        steady_state(TrimerParams(J=0.01, gamma=0.0))


def test_rotating_frame_does_not_change_currents():
    p = FIG3.with_(theta=1.1)
    a = steady_state(p, rotating=True, with_temperatures=False)
    b = steady_state(p, rotating=False, with_temperatures=False)
    np.testing.assert_allclose(a.currents, b.currents, atol=1e-14)


def test_symmetric_at_zero_phase():
    rep = steady_state(FIG3.with_(theta=0.0), with_temperatures=False)
    assert rep.J13 == pytest.approx(0.0, abs=1e-15)
    assert rep.J21 == pytest.approx(rep.J23, rel=1e-12)
    assert rep.J21 > 0


@pytest.mark.parametrize("seed", range(6))
def test_site_particle_conservation(seed):
    p = random_params(np.random.default_rng(seed))
    rep = steady_state(p, with_temperatures=False)
    C = rep.C
    h = build_single_particle_hamiltonian(p)
    inj = p.gammas * (p.bath_occupations - rep.occupations)
    J = lambda l, m: link_current(C, h, (l, m))  # noqa: E731
    outflow = [J(1, 2) + J(1, 3), J(2, 1) + J(2, 3), J(3, 1) + J(3, 2)]
    np.testing.assert_allclose(inj, outflow, atol=1e-9 * p.gamma)


@pytest.mark.parametrize("seed", range(6))
def test_energy_balance(seed):
    p = random_params(np.random.default_rng(seed + 10))
    rep = steady_state(p, with_temperatures=False)
    assert abs(rep.heat_currents.sum()) <= 1e-9 * p.gamma * p.omega * max(p.n_hot, 1)


@pytest.mark.parametrize("theta", [0.2, 1.0, math.pi / 2, 2.9])
def test_reciprocity(theta):
    a = steady_state(FIG3.with_(theta=theta), with_temperatures=False)
    b = steady_state(FIG3.with_(theta=2 * math.pi - theta), with_temperatures=False)
    assert a.J13 == pytest.approx(-b.J13, abs=1e-9 * FIG3.J)


def test_heat_current_formula():
    p = FIG3
    occ = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(heat_currents(p, occ), p.gammas * p.omega * (p.bath_occupations - occ))


def test_report_temperatures_and_second_law():
    rep = steady_state(FIG3.with_(theta=1.0))
    T = np.asarray(rep.effective_temperatures)
    assert np.all((T > FIG3.T_cold - 0.5) & (T < FIG3.T_hot + 0.5))
    assert rep.second_law_slack <= 1e-10
    assert rep.entropy_production == pytest.approx(entropy_production(rep))
    assert rep.entropy_production_bath >= 0
    assert all(d.anomalous < 1e-10 for d in rep.teff_details)


def test_hot_site_heats_the_cold_sites():
    rep = steady_state(FIG3.with_(theta=0.0))
    assert rep.heat_currents[1] > 0 > rep.heat_currents[0]
    assert rep.effective_temperatures[0] > FIG3.T_cold
    assert rep.effective_temperatures[1] < FIG3.T_hot
