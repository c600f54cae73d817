import math

import numpy as np
import pytest
from scipy import integrate

from hjwave import GridSpec, PotentialSpec, RadialModel, angular_rate, build_q12, build_state_2d, propagate_2d, u_eval
from hjwave.errors import DomainError, NormalizabilityError, SignalError
from hjwave.quantum_grid import energy
from hjwave.radial2d import (angular_momentum, convention_report, normalizability, q1_expectation,
                             radial_action)


def radial(g=0.0, m=1.0, omega=1.0, convention="derived"):
    return RadialModel(PotentialSpec(m, omega, g, "2-radial"), convention)


@pytest.fixture(scope="module")
def harmonic2d():
    return radial()


@pytest.fixture(scope="module")
def quartic2d():
    return radial(0.05)


def glauber_2d(grid, hbar, z1, omega=1.0):
    X, Y = grid.mesh()
    return np.exp(-omega * (X * X + Y * Y) / (2 * hbar) + math.sqrt(2 * omega / hbar) * z1 * (X + 1j * Y))


def overlap(a, b):
    return abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)


def test_requires_radial_spec():
    with pytest.raises(DomainError):
        RadialModel(PotentialSpec())
    with pytest.raises(DomainError):
        radial(convention="other")


@pytest.mark.parametrize("m, omega, g", [(1, 1, 0), (1, 1, 0.05), (2, 0.7, 0.2)])
def test_frequencies(m, omega, g):
    model = radial(g, m, omega)
    assert abs(model.omega1 - omega) <= 1e-4
    assert abs(model.omega2 - 2 * omega) <= 1e-4


def test_radial_action_harmonic_closed_form():
    spec = PotentialSpec(1, 1.3, 0, "2-radial")
    for E, ell in ((1.0, 0.2), (0.01, 0.0), (2.0, -0.5)):
        assert radial_action(spec, E, ell) == pytest.approx((E - 1.3 * abs(ell)) / (2 * 1.3), rel=1e-12)


def test_radial_action_against_quad():
    spec = PotentialSpec(1, 1, 0.3, "2-radial")
    E, ell = 0.8, 0.3
    f = lambda r: 2 * (E - spec.V(r)) - ell * ell / (r * r)  # noqa: E731
    r = np.linspace(1e-3, 3, 300001)
    inside = r[f(r) > 0]
    a, b = inside[0] - 1e-5, inside[-1] + 1e-5
    ref, _ = integrate.quad(lambda x: math.sqrt(max(f(x), 0.0)), a, b, limit=400, epsabs=1e-12)
    assert radial_action(spec, E, ell) == pytest.approx(ref / math.pi, rel=1e-7)


def test_u_eval(harmonic2d):
    assert u_eval(harmonic2d, 2.0) == pytest.approx(math.log(2), abs=1e-13)
    with pytest.raises(DomainError):
        u_eval(harmonic2d, 0.0)
    with pytest.raises(DomainError):
        u_eval(harmonic2d, -1.0)


def test_u_eval_quartic_against_quad():
    model = radial(0.2)
    f = lambda p: 1 / math.sqrt(2 * model.spec.V(p)) - 1 / p  # noqa: E731
    ref, _ = integrate.quad(f, 0, 1, epsabs=1e-14, epsrel=1e-14)
    assert abs(u_eval(model, 1.0) - ref) <= 1e-10


def test_q1_small_r_limit():
    model = radial(0.2)
    assert abs(math.exp(model.omega1 * u_eval(model, 1e-4)) / 1e-4 - 1) <= 1e-6
    q1, _ = build_q12(model, 0.0, 0.3)
    assert q1 == 0


def test_q12_harmonic(harmonic2d):
    r = np.linspace(0, 6, 301)
    phi = np.linspace(-math.pi, math.pi, 301)
    q1, q2 = build_q12(harmonic2d, r, phi)
    assert np.max(np.abs(q1 - r * np.exp(1j * phi))) <= 1e-8
    assert np.max(np.abs(q2 - r**2)) <= 1e-8 * 36
    _, q2p = build_q12(radial(convention="paper"), r, phi)
    assert np.max(np.abs(q2p - r**4)) <= 1e-8 * 6**4
    q1w, _ = build_q12(harmonic2d, r, phi + 2 * math.pi)
    assert np.max(np.abs(q1w - q1)) <= 1e-13


def test_q1_regularization_consistency(quartic2d):
    r = np.linspace(0.01, 4, 200)
    phi = 0.7
    q1, _ = build_q12(quartic2d, r, phi)
    m, w0, w1 = quartic2d.spec.m, quartic2d.omega0, quartic2d.omega1
    alt = r * np.exp(1j * phi) * np.exp(w1 * (u_eval(quartic2d, r) - np.log(r) / (m * w0)))
    assert np.max(np.abs(q1 - alt) / np.abs(alt)) <= 1e-10


def test_vacuum_and_glauber_states(harmonic2d, quartic2d):
    grid = GridSpec(5.0, 256, 0.1)
    st = build_state_2d(harmonic2d, 0.1, 0.6 - 0.3j, 0, grid)
    assert overlap(st.psi, glauber_2d(grid, 0.1, 0.6 - 0.3j)) >= 1 - 1e-8
    vac = build_state_2d(quartic2d, 0.1, 0, 0, grid)
    X, Y = grid.mesh()
    assert overlap(vac.psi, np.exp(-quartic2d.action.closed_form(np.hypot(X, Y)) / 0.1)) >= 1 - 1e-14


def test_paper_convention_rejected_for_positive_z2():
    model = radial(convention="paper")
    grid = GridSpec(5.0, 256, 0.1)
    with pytest.raises(NormalizabilityError) as info:
        build_state_2d(model, 0.1, 0.5, 0.3, grid)
    assert info.value.growth_exponent == pytest.approx(4, abs=0.1)
    ok, growth, change = normalizability(radial(), 0.1, 0.5, 0.3, 5.0)
    assert ok and growth < 0 and abs(change) < 1e-10


def test_convention_report(harmonic2d):
    rep = convention_report(harmonic2d.spec, 0.1, 0.5, 0.3, 5.0)
    assert rep["harmonic.paper"]["normalizable"] is False
    assert rep["harmonic.derived"]["normalizable"] is True
    assert rep["harmonic.paper"]["q2_exponent_factor"] == 2
    assert rep["harmonic.derived"]["q2_exponent_factor"] == 1


def _relabel_rot90(psi):
    # (x, y) -> (-y, x) on the periodic lattice x_j = -L + j dx
    N = psi.shape[0]
    idx = (N - np.arange(N)) % N
    return psi.T[:, idx]


def test_propagation_commutes_with_rotation(quartic2d):
    grid = GridSpec(5.0, 256, 0.1)
    st = build_state_2d(quartic2d, 0.1, 0.7 + 0.2j, 0, grid)
    rot = type(st)(_relabel_rot90(st.psi), st.L, True)
    a = propagate_2d(st, quartic2d, grid, 0.5, stride=1000).states[-1].psi
    b = propagate_2d(rot, quartic2d, grid, 0.5, stride=1000).states[-1].psi
    assert np.max(np.abs(_relabel_rot90(a) - b)) <= 1e-10


@pytest.mark.slow
def test_harmonic_fidelity_five_periods(harmonic2d):
    grid = GridSpec(5.0, 256, 0.1)
    z1 = 0.8
    st = build_state_2d(harmonic2d, 0.1, z1, 0, grid)
    snaps = propagate_2d(st, harmonic2d, grid, 5 * 2 * math.pi, stride=500)
    for t, s in zip(snaps.times, snaps.states):
        ref = glauber_2d(grid, 0.1, z1 * np.exp(-1j * t))
        assert overlap(ref, s.psi) >= 1 - 1e-5


@pytest.mark.slow
def test_norm_drift_and_lz_conservation(quartic2d):
    grid = GridSpec(5.0, 256, 0.1)
    st = build_state_2d(quartic2d, 0.1, 0.7, 0, grid)
    dt = grid.max_dt(1.0)
    snaps = propagate_2d(st, quartic2d, grid, 1e4 * dt, stride=2500)
    assert snaps.steps == 10_000
    assert abs(snaps.states[-1].norm() - 1) <= 1e-11
    lz = np.array([angular_momentum(s, 0.1) for s in snaps.states])
    assert np.max(np.abs(lz - lz[0])) <= 1e-8 * abs(lz[0])


def test_energy_drift_under_dt_halving(quartic2d):
    grid = GridSpec(5.0, 256, 0.1)
    st = build_state_2d(quartic2d, 0.1, 0.7, 0, grid)
    e0 = energy(st, quartic2d.spec, 0.1)
    dt = grid.max_dt(1.0)
    drifts = []
    for step in (dt, dt / 2):
        end = propagate_2d(st, quartic2d, grid, 2.0, stride=10**6, dt=step).states[-1]
        drifts.append(abs(energy(end, quartic2d.spec, 0.1) - e0) / e0)
    assert drifts[1] <= 1e-7
    assert drifts[1] < drifts[0]


@pytest.mark.slow
def test_angular_rate_harmonic(harmonic2d):
    grid = GridSpec(5.0, 256, 0.1)
    st = build_state_2d(harmonic2d, 0.1, 0.5, 0, grid)
    snaps = propagate_2d(st, harmonic2d, grid, 2 * 2 * math.pi, stride=100)
    rate = angular_rate(snaps, harmonic2d)
    assert abs(rate + harmonic2d.omega0) <= 1e-3 * harmonic2d.omega0
    # the packet with label z1 sits at conj(z1): <Q1> itself turns the other way
    q = [q1_expectation(s, harmonic2d) for s in snaps.states[:3]]
    assert np.angle(q[1] / q[0]) > 0


def test_angular_rate_needs_signal(harmonic2d):
    grid = GridSpec(5.0, 256, 0.1)
    st = build_state_2d(harmonic2d, 0.1, 0, 0, grid)
    snaps = propagate_2d(st, harmonic2d, grid, 0.2, stride=10)
    with pytest.raises(SignalError):
        angular_rate(snaps, harmonic2d)
