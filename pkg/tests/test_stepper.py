import math

import numpy as np
import pytest

from allmach.config import RunConfig
from allmach.errors import CflViolationError, ConfigurationError, NonlinearSolverError
from allmach.fields import State, init_state
from allmach.mesh import build_uniform_mesh
from allmach.runner import _params
from allmach.stepper import (StepWorkspace, choose_eta, compute_dt, mass_update,
                             momentum_update, solve_theta_implicit, step)
from allmach.ops import dual_density
from allmach.cases import get_case

from conftest import make_case, random_positive_field


def params_for(case_name="colliding-pulses", gamma=1.4, eps=1.0, **kw):
    cfg = RunConfig(case=case_name, **kw).validate()
    return _params(cfg, gamma, eps)


# ---------------------------------------------------------------------------
# compute_dt


def test_compute_dt_uniform_1d():
    mesh = build_uniform_mesh(((0.0, 1.0),), (4,))
    state = State(rho=np.ones(4), theta=np.ones(4), u=[np.ones(4)])
    dt = compute_dt(mesh, state, beta=0.5, dt_max=10.0)
    assert dt == pytest.approx(1.0 / 24.0)  # (1/3) / (2/h = 8)


def test_compute_dt_quiescent_returns_cap():
    mesh = build_uniform_mesh(((0.0, 1.0),), (4,))
    state = State(rho=np.ones(4), theta=np.ones(4), u=[np.zeros(4)])
    assert compute_dt(mesh, state, beta=0.5, dt_max=0.125) == 0.125


def test_compute_dt_density_ratio_factor():
    mesh = build_uniform_mesh(((0.0, 1.0),), (2,))
    uniform = State(rho=np.ones(2), theta=np.ones(2), u=[np.ones(2)])
    skewed = State(rho=np.array([1.0, 4.0]), theta=np.ones(2), u=[np.ones(2)])
    dt_uniform = compute_dt(mesh, uniform, beta=0.5, dt_max=10.0)
    dt_skewed = compute_dt(mesh, skewed, beta=0.5, dt_max=10.0)
    assert dt_skewed == pytest.approx(0.25 * dt_uniform)


def test_compute_dt_validates_beta():
    mesh = build_uniform_mesh(((0.0, 1.0),), (4,))
    state = State(rho=np.ones(4), theta=np.ones(4), u=[np.ones(4)])
    with pytest.raises(ConfigurationError):
        compute_dt(mesh, state, beta=0.6, dt_max=1.0)


# ---------------------------------------------------------------------------
# mass update


def test_mass_update_constant_state():
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    state = State(rho=np.full(8, 1.7), theta=np.ones(8), u=[np.full(8, 0.3)])
    assert np.allclose(mass_update(mesh, state, 0.01), 1.7)


def test_mass_update_upwind_shift_oracle():
    # brute-force oracle: rho_new[i] = rho[i] - 0.2 (rho[i] - rho[i-1])
    mesh = build_uniform_mesh(((0.0, 1.0),), (4,))
    rho = np.array([1.0, 2.0, 1.0, 2.0])
    state = State(rho=rho, theta=np.ones(4), u=[np.ones(4)])
    out = mass_update(mesh, state, 0.05)
    expected = rho - 0.2 * (rho - np.roll(rho, 1))
    assert np.allclose(out, [1.2, 1.8, 1.2, 1.8])
    assert np.allclose(out, expected)


def test_mass_update_conserves_total(rng):
    mesh = build_uniform_mesh(((0.0, 1.0), (0.0, 1.0)), (6, 6))
    rho = random_positive_field(rng, mesh.n_cells)
    u = [0.2 * rng.standard_normal(mesh.n_faces[d]) for d in range(2)]
    state = State(rho=rho, theta=np.ones(mesh.n_cells), u=u)
    out = mass_update(mesh, state, 0.01)
    before = mesh.cell_volume * rho.sum()
    after = mesh.cell_volume * out.sum()
    assert abs(after - before) <= 1e-13 * abs(before)


def test_mass_update_positivity_guard():
    mesh = build_uniform_mesh(((0.0, 1.0),), (4,))
    state = State(rho=np.array([1e-6, 1.0, 1.0, 1.0]), theta=np.ones(4),
                  u=[np.ones(4)])
    with pytest.raises(CflViolationError):
        mass_update(mesh, state, 0.5)


# ---------------------------------------------------------------------------
# eta


def test_choose_eta_values():
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    ones = State(rho=np.ones(8), theta=np.ones(8), u=[np.zeros(8)])
    halves = State(rho=np.full(8, 0.5), theta=np.ones(8), u=[np.zeros(8)])
    assert choose_eta(mesh, ones) == pytest.approx(1.5)
    assert choose_eta(mesh, halves) == pytest.approx(3.0)


def test_choose_eta_colliding_pulses_oracle():
    case = get_case("colliding-pulses")
    mesh = build_uniform_mesh(case.extents, case.counts)
    state = init_state(mesh, case, 0.1)
    # independent oracle: min over faces of the two-cell mean
    mins = min(0.5 * (state.rho[i] + state.rho[(i + 1) % 200]) for i in range(200))
    assert choose_eta(mesh, state) == pytest.approx(1.5 / mins, rel=1e-13)
    assert choose_eta(mesh, state) == pytest.approx(1.5 / 0.955, rel=1e-2)


def test_choose_eta_floor():
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    ones = State(rho=np.ones(8), theta=np.ones(8), u=[np.zeros(8)])
    assert choose_eta(mesh, ones, eta_floor=7.0) == 7.0


# ---------------------------------------------------------------------------
# implicit temperature solve


def test_implicit_solve_constant_fixed_point():
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    state = State(rho=np.full(8, 2.0), theta=np.full(8, 0.5),
                  u=[np.full(8, 0.4)])
    res = solve_theta_implicit(mesh, state, np.full(8, 2.0), dt=0.01,
                               eta=1.5, eps=1.0, gamma=1.4)
    assert res.iterations == 0
    assert np.allclose(res.theta_total, 1.0)
    assert np.allclose(res.pressure, 1.0)


def brute_force_theta_residual(mesh, theta, theta_old, u, dt, eta, eps, gamma):
    """Independent residual: explicit loops, sign splitting from definitions."""
    n = mesh.n_cells
    h = mesh.spacing[0]
    res = np.empty(n)
    p = theta ** gamma
    for k in range(n):
        acc = 0.0
        for face, sign in (((k) % n, +1.0), ((k - 1) % n, -1.0)):
            kk, ll = face, (face + 1) % n
            du = (eta * dt / (eps * eps)) * (p[ll] - p[kk]) / h
            v_plus = max(u[face], 0.0) - min(du, 0.0)
            v_minus = min(u[face], 0.0) - max(du, 0.0)
            flux = theta[kk] * v_plus + theta[ll] * v_minus
            acc += sign * flux
        res[k] = (theta[k] - theta_old[k]) / dt + acc / h
    return res


def test_implicit_solve_matches_dense_newton_oracle(rng):
    # oracle: dense Newton with finite-difference Jacobian on the
    # independently assembled residual (8-cell grid)
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    rho = random_positive_field(rng, 8, 0.8, 1.2)
    theta = random_positive_field(rng, 8, 0.8, 1.2)
    u = 0.3 * rng.standard_normal(8)
    state = State(rho=rho, theta=theta, u=[u])
    dt, eta, eps, gamma = 0.01, 1.5, 0.5, 1.4
    theta_old = rho * theta

    guess = theta_old.copy()
    for _ in range(60):
        r = brute_force_theta_residual(mesh, guess, theta_old, u, dt, eta, eps, gamma)
        if np.abs(r).max() < 1e-14 / dt:
            break
        jac = np.empty((8, 8))
        h_fd = 1e-7
        for j in range(8):
            bumped = guess.copy()
            bumped[j] += h_fd
            jac[:, j] = (brute_force_theta_residual(
                mesh, bumped, theta_old, u, dt, eta, eps, gamma) - r) / h_fd
        guess = guess - np.linalg.solve(jac, r)

    res = solve_theta_implicit(mesh, state, rho.copy(), dt, eta, eps, gamma,
                               tol=1e-13 / dt)
    assert np.abs(res.theta_total - guess).max() < 1e-12
    assert res.iterations <= 8


def test_implicit_solve_negligible_stabilization_matches_upwind(rng):
    # with a huge eps the shift is negligible: the solve matches the plain
    # implicit upwind advance, assembled densely from frozen velocity signs
    mesh = build_uniform_mesh(((0.0, 1.0),), (16,))
    n = 16
    rho = np.ones(n)
    theta = 1.0 + 0.1 * np.sin(2.0 * np.pi * mesh.cell_centers()[0])
    u = 0.5 + 0.2 * rng.standard_normal(n)
    state = State(rho=rho, theta=theta, u=[u])
    dt, gamma = 0.01, 1.4
    h = mesh.spacing[0]

    a = np.zeros((n, n))
    for k in range(n):
        a[k, k] += 1.0 / dt
        for face, sign in ((k, +1.0), ((k - 1) % n, -1.0)):
            kk, ll = face, (face + 1) % n
            a[k, kk] += sign * max(u[face], 0.0) / h
            a[k, ll] += sign * min(u[face], 0.0) / h
    dense = np.linalg.solve(a, rho * theta / dt)

    # eps large enough that the residual shift contribution sits below the
    # comparison tolerance for this data
    res = solve_theta_implicit(mesh, state, rho, dt, eta=1.5, eps=1e4,
                               gamma=gamma, tol=1e-13 / dt)
    assert np.abs(res.theta_total - dense).max() < 1e-8


def test_implicit_solve_conserves_total(rng):
    mesh = build_uniform_mesh(((0.0, 1.0), (0.0, 1.0)), (8, 8))
    rho = random_positive_field(rng, mesh.n_cells, 0.9, 1.1)
    theta = random_positive_field(rng, mesh.n_cells, 0.9, 1.1)
    u = [0.3 * rng.standard_normal(mesh.n_faces[d]) for d in range(2)]
    state = State(rho=rho, theta=theta, u=u)
    res = solve_theta_implicit(mesh, state, rho, dt=0.005, eta=1.5, eps=0.3,
                               gamma=1.4)
    before = mesh.cell_volume * (rho * theta).sum()
    after = mesh.cell_volume * res.theta_total.sum()
    assert abs(after - before) <= 1e-12 * abs(before)
    assert np.all(res.theta_total > 0.0)


def test_implicit_solve_failure_reports():
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    state = State(rho=np.ones(8), theta=1.0 + 0.5 * np.sin(
        2 * np.pi * mesh.cell_centers()[0]), u=[np.full(8, 2.0)])
    with pytest.raises(NonlinearSolverError) as err:
        solve_theta_implicit(mesh, state, np.ones(8), dt=0.01, eta=1.5,
                             eps=0.1, gamma=1.4, max_iter=1)
    assert err.value.iterations == 1


# ---------------------------------------------------------------------------
# momentum update


def test_momentum_constant_state_unchanged():
    mesh = build_uniform_mesh(((0.0, 1.0), (0.0, 1.0)), (4, 4))
    u = [np.full(mesh.n_faces[d], 0.8) for d in range(2)]
    state = State(rho=np.full(16, 2.0), theta=np.ones(16), u=u)
    out = momentum_update(mesh, state, np.full(16, 2.0), np.ones(16),
                          dt=0.01, eps=0.5)
    for d in range(2):
        assert np.allclose(out[d], 0.8)


def test_momentum_pure_acoustic_kick(rng):
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    rho = np.ones(8)
    p = random_positive_field(rng, 8)
    state = State(rho=rho, theta=np.ones(8), u=[np.zeros(8)])
    dt, eps = 0.01, 0.5
    out = momentum_update(mesh, state, rho, p, dt, eps)[0]
    grad = (p[np.arange(1, 9) % 8] - p) / mesh.spacing[0]
    assert np.allclose(out, -(dt / eps ** 2) * grad)


def test_momentum_conservation_constant_pressure(rng):
    # telescoping oracle: with constant pressure the dual convection sums out
    mesh = build_uniform_mesh(((0.0, 1.0), (0.0, 1.0)), (6, 6))
    rho = random_positive_field(rng, mesh.n_cells)
    u = [0.2 * rng.standard_normal(mesh.n_faces[d]) for d in range(2)]
    state = State(rho=rho, theta=np.ones(mesh.n_cells), u=u)
    dt = 0.002
    rho_new = mass_update(mesh, state, dt)
    out = momentum_update(mesh, state, rho_new, np.full(mesh.n_cells, 3.3), dt, 1.0)
    for d in range(2):
        before = np.sum(mesh.dual_volume[d] * dual_density(mesh, rho, d) * u[d])
        after = np.sum(mesh.dual_volume[d] * dual_density(mesh, rho_new, d) * out[d])
        assert after == pytest.approx(before, rel=1e-11, abs=1e-13)


# ---------------------------------------------------------------------------
# full step


def test_step_constant_state_is_fixed_point():
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    case = make_case()
    state = init_state(mesh, case, 1.0)
    params = params_for(gamma=1.4, eps=1.0, dt_max=0.07)
    new_state, report = step(mesh, state, params)
    assert report.dt == 0.07  # quiescent: cap
    assert np.allclose(new_state.rho, 1.0)
    assert np.allclose(new_state.theta, 1.0)
    assert all(np.allclose(c, 0.0) for c in new_state.u)


def test_step_energy_monotone_on_pulses():
    case = get_case("colliding-pulses")
    mesh = build_uniform_mesh(case.extents, (64,))
    state = init_state(mesh, case, 0.1)
    params = params_for(gamma=case.gamma, eps=0.1)
    ws = StepWorkspace(mesh)
    for _ in range(12):
        state, report = step(mesh, state, params, workspace=ws)
        assert report.newton_residual <= 1e-6
        assert report.energy_after <= report.energy_before * (1.0 + 1e-11)
        assert report.cfl_margin <= 1.0 + 1e-12
    assert state.rho.min() > 0 and state.theta.min() > 0


def test_step_leaves_input_untouched_on_failure():
    case = get_case("colliding-pulses")
    mesh = build_uniform_mesh(case.extents, (64,))
    state = init_state(mesh, case, 0.1)
    snapshot = state.copy()
    params = params_for(gamma=case.gamma, eps=0.1, newton_max_iter=1)
    with pytest.raises(NonlinearSolverError):
        step(mesh, state, params)
    assert np.array_equal(state.rho, snapshot.rho)
    assert np.array_equal(state.theta, snapshot.theta)
    assert all(np.array_equal(a, b) for a, b in zip(state.u, snapshot.u))


def test_step_gamma_one_skips_energy():
    case = get_case("cylindrical-explosion")
    mesh = build_uniform_mesh(case.extents, (16, 16))
    state = init_state(mesh, case, 1.0)
    params = params_for(case_name="cylindrical-explosion", gamma=1.0, eps=1.0)
    new_state, report = step(mesh, state, params)
    assert report.energy_before is None and report.energy_after is None
    assert new_state.rho.min() > 0.0
