import numpy as np
import pytest
from scipy.integrate import quad

from allmach.cases import get_case
from allmach.errors import InvalidInitialDataError
from allmach.fields import eos_pressure, init_state
from allmach.mesh import build_uniform_mesh

from conftest import make_case


def test_constant_case_gives_unit_state():
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    state = init_state(mesh, make_case(), 1.0)
    assert np.all(state.rho == 1.0)
    assert np.all(state.theta == 1.0)
    assert np.all(state.u[0] == 0.0)


def test_colliding_pulses_velocity_vanishes_at_wrap():
    case = get_case("colliding-pulses")
    mesh = build_uniform_mesh(case.extents, (200,))
    state = init_state(mesh, case, 0.1)
    (xf,) = mesh.face_centers(0)
    # 1 - cos(2 pi x) vanishes at x in {-1, 0, 1}
    for target in (0.0, 1.0):
        i = int(np.argmin(np.abs(xf - target)))
        assert state.u[0][i] == pytest.approx(0.0, abs=1e-12)


def test_vortex_far_field_is_quiescent():
    case = get_case("stationary-vortex")
    # r = 0.5 > outer radius: zero velocity, unit temperature
    assert case.u0[0](np.array([1.0]), np.array([0.5]), 0.1)[0] == 0.0
    assert case.u0[1](np.array([1.0]), np.array([0.5]), 0.1)[0] == 0.0
    assert case.theta0(np.array([1.0]), np.array([0.5]), 0.1)[0] == 1.0


def test_init_rejects_nonpositive_density():
    bad = make_case(rho0=lambda x, eps: np.asarray(x) - 10.0)
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    with pytest.raises(InvalidInitialDataError):
        init_state(mesh, bad, 1.0)


def test_eos_unit_and_power():
    assert eos_pressure(np.array([1.0]), 1.4)[0] == 1.0
    assert eos_pressure(np.array([4.0]), 2.0)[0] == 16.0


def test_eos_rejects_nonpositive():
    with pytest.raises(ValueError):
        eos_pressure(np.array([0.0]), 1.4)


def test_eos_linearization_oracle():
    # Taylor oracle: |(1 + e^2 k)^gamma - 1 - gamma e^2 k| <= C e^4
    gamma = 1.4
    eps = 1e-3
    k = np.linspace(-1.0, 1.0, 11)
    p = eos_pressure(1.0 + eps * eps * k, gamma)
    remainder = np.abs(p - 1.0 - gamma * eps * eps * k)
    assert remainder.max() <= 5.0 * eps ** 4


def test_pulses_pressure_flattens_with_eps():
    case = get_case("colliding-pulses")
    mesh = build_uniform_mesh(case.extents, (64,))
    for eps in (1e-1, 1e-2, 1e-3):
        state = init_state(mesh, case, eps)
        p = eos_pressure(state.theta_total, case.gamma)
        # datum construction gives p = 1 + eps*gamma*(1 - cos); max dev O(eps)
        assert np.abs(p - 1.0).max() <= 2.0 * case.gamma * eps * 1.0001


def test_midpoint_sampling_second_order():
    # mass total converges to the exact integral at order >= 2
    case = make_case(rho0=lambda x, eps: np.exp(np.asarray(x, dtype=float)))
    exact, _ = quad(np.exp, 0.0, 1.0, epsabs=1e-14)
    errs = []
    for n in (16, 32, 64):
        mesh = build_uniform_mesh(((0.0, 1.0),), (n,))
        state = init_state(mesh, case, 1.0)
        errs.append(abs(mesh.cell_volume * state.rho.sum() - exact))
    order1 = np.log2(errs[0] / errs[1])
    order2 = np.log2(errs[1] / errs[2])
    assert order1 >= 1.9 and order2 >= 1.9


def test_state_copy_is_deep():
    mesh = build_uniform_mesh(((0.0, 1.0),), (8,))
    state = init_state(mesh, make_case(), 1.0)
    clone = state.copy()
    clone.rho[0] = 5.0
    assert state.rho[0] == 1.0
