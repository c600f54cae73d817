import math

import numpy as np
import pytest

from hjwave import (ActionModel, CoherentParams, GridSpec, PotentialSpec, QMap, WaveFunctionGrid,
                    build_state_1d, ground_state, observables, propagate)
from hjwave.analysis import extrapolate_to_zero
from hjwave.errors import GridError, LeakError, StepSizeError
from hjwave.quantum_grid import apply_fd, energy, fd_bands, numeric_action, refined_argmax

METHODS = ("tridiagonal_eigensolver", "imaginary_time")


@pytest.mark.parametrize("method", METHODS)
def test_harmonic_ground_energy(method):
    # the 2nd-order Laplacian has an O(dx^2) energy bias; a fine grid brings it under 1e-8
    spec = PotentialSpec(1, 1, 0)
    grid = GridSpec(3.0, 16384, 0.1)
    gs = ground_state(spec, grid, method)
    assert abs(gs.energy - 0.05) <= 1e-8
    x, rho = grid.x, np.abs(gs.chi.psi) ** 2
    var = np.sum(x * x * rho) * grid.dx
    assert var == pytest.approx(0.1 / 2, rel=1e-6)


def test_dense_eigensolver_oracle():
    spec = PotentialSpec(1, 1, 0.1)
    grid = GridSpec(4.0, 512, 0.1)
    diag, off = fd_bands(spec, grid)
    H = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    e_dense = np.linalg.eigvalsh(H)[0]
    for method in METHODS:
        assert abs(ground_state(spec, grid, method).energy - e_dense) <= 1e-8


def test_methods_agree_and_invariants():
    spec = PotentialSpec(1, 1, 0.1)
    grid = GridSpec(4.0, 2048, 0.1)
    a, b = (ground_state(spec, grid, m) for m in METHODS)
    assert abs(a.energy - b.energy) <= 1e-8
    assert np.linalg.norm(a.chi.psi - b.chi.psi) * math.sqrt(grid.dx) <= 1e-6
    for gs in (a, b):
        assert gs.residual <= 1e-8
        assert abs(gs.chi.norm() - 1) <= 1e-12
        interior = gs.chi.psi.real[1:-1]
        assert np.all(interior > 0)
    assert b.iterations > 0


def test_ground_state_grid_precondition():
    with pytest.raises(GridError, match="L/8"):
        ground_state(PotentialSpec(), GridSpec(1.0, 256, 0.1))
    with pytest.raises(ValueError):
        ground_state(PotentialSpec(), GridSpec(4.0, 256, 0.1), "power_iteration")


def test_eq_over_hbar_intercept():
    spec = PotentialSpec(1, 1, 0.1)
    hbars = (0.2, 0.1, 0.05, 0.025)
    scaled = [ground_state(spec, GridSpec(4.0, 4096, h)).energy / h for h in hbars]
    assert abs(extrapolate_to_zero(hbars, scaled) - 0.5) <= 0.02 * 0.5


def test_hamiltonian_self_adjoint():
    spec = PotentialSpec(1, 1, 0.3)
    grid = GridSpec(4.0, 512, 0.1)
    diag, off = fd_bands(spec, grid)
    rng = np.random.default_rng(11)
    for _ in range(5):
        psi = rng.normal(size=grid.N) + 1j * rng.normal(size=grid.N)
        psi /= np.linalg.norm(psi) * math.sqrt(grid.dx)
        val = np.vdot(psi, apply_fd(diag, off, psi)) * grid.dx
        assert abs(val.imag) <= 1e-12 * abs(val.real)


def test_numeric_action():
    spec = PotentialSpec(1, 1, 0.1)
    grid = GridSpec(4.0, 1024, 0.1)
    S, mask = numeric_action(ground_state(spec, grid), grid.hbar)
    assert S[grid.N // 2] == 0.0
    assert mask[grid.N // 2] and np.all(np.isnan(S[~mask]))
    assert np.all(S[mask] >= 0)


def _packet(spec, grid, z):
    return build_state_1d(CoherentParams(grid.hbar, z), ActionModel(spec), QMap(spec), grid)


@pytest.mark.parametrize("precision, bound", [("extended", 1e-12), ("double", 5e-12)])
def test_norm_drift_per_1e4_steps(precision, bound):
    spec = PotentialSpec(1, 1, 0.1)
    grid = GridSpec(4.0, 1024, 0.05)
    st = _packet(spec, grid, 0.8)
    dt = grid.max_dt(spec.m)
    snaps = propagate(st, spec, grid, 1e4 * dt, stride=10_000, precision=precision)
    assert snaps.steps == 10_000 and snaps.meta["precision"] == precision
    assert abs(snaps.states[-1].norm() - st.norm()) <= bound


def test_energy_drift_over_1e5_steps():
    spec = PotentialSpec(1, 1, 0.1)
    grid = GridSpec(4.0, 1024, 0.1)
    st = _packet(spec, grid, 0.7)
    dt = grid.max_dt(spec.m)
    E = [energy(s, spec, grid.hbar)
         for s in propagate(st, spec, grid, 1e5 * dt, stride=5000).states]
    assert np.max(np.abs(np.array(E) - E[0])) / E[0] <= 1e-8


def test_energy_error_is_second_order_in_dt():
    spec = PotentialSpec(1, 1, 0.1)
    grid = GridSpec(4.0, 256, 0.1)
    st = _packet(spec, grid, 0.7)
    T = 20.0
    errs = []
    for dt in (2e-3, 1e-3):
        E = [energy(s, spec, grid.hbar) for s in propagate(st, spec, grid, T, stride=200, dt=dt).states]
        errs.append(np.max(np.abs(np.array(E) - E[0])))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_snapshot_schedule():
    spec = PotentialSpec(1, 1, 0)
    grid = GridSpec(4.0, 256, 0.1)
    snaps = propagate(_packet(spec, grid, 0.5), spec, grid, 1.0, stride=100, dt=2.5e-3)
    assert snaps.steps == 400
    np.testing.assert_allclose(snaps.times, [0, 0.25, 0.5, 0.75, 1.0], atol=1e-15)
    assert all(np.all(np.diff(snaps.times) > 0) for _ in [0])


def test_step_size_and_leak_errors():
    spec = PotentialSpec(1, 1, 0)
    grid = GridSpec(4.0, 256, 0.1)
    st = _packet(spec, grid, 0.5)
    with pytest.raises(StepSizeError):
        propagate(st, spec, grid, 1.0, dt=1.0)
    # a fast free-moving packet runs into the periodic boundary
    free = PotentialSpec(1, 1e-3, 0)
    x = grid.x
    moving = WaveFunctionGrid(np.exp(-(x + 1) ** 2 / 0.05 + 1j * 30 * x), grid.L).normalize()
    with pytest.raises(LeakError):
        propagate(moving, free, grid, 1.0, stride=10)
    with pytest.raises(GridError):
        propagate(st, spec, GridSpec(4.0, 512, 0.1), 1.0)


def test_observables_examples():
    spec = PotentialSpec(1, 1, 0)
    grid = GridSpec(4.0, 1024, 0.1)
    x = grid.x
    gauss = WaveFunctionGrid(np.exp(-(x - 0.37) ** 2 / 0.02).astype(complex), grid.L).normalize()
    obs = observables(gauss, spec, grid)
    assert abs(obs["mean_x"] - 0.37) <= grid.dx / 10
    assert abs(obs["peak_x"] - 0.37) <= grid.dx / 10
    assert all(math.isfinite(v) for v in obs.values())
    coh = observables(_packet(spec, grid, 1.0), spec, grid)
    assert coh["mean_x"] == pytest.approx(math.sqrt(0.2), abs=1e-10)
    assert coh["energy"] == pytest.approx(0.1 * (1 + 0.5), rel=1e-10)
    vac = observables(_packet(spec, grid, 0.0), spec, grid)
    assert abs(vac["mean_x"]) <= 1e-10


def test_refined_argmax_exact_on_gaussian():
    x = np.linspace(-1, 1, 201)
    rho = np.exp(-((x - 0.1234) ** 2) / 0.01)
    assert refined_argmax(x, rho) == pytest.approx(0.1234, abs=1e-12)
