"""Limiting semi-implicit scheme: incompressible, density-dependent transport.

The compressible scheme's zero-Mach-number limit replaces the stiff pressure
by a second-order pressure whose gradient enforces a stabilized divergence
constraint on the old velocity.  This module advances that limit scheme; it
serves as the comparison target for the low-Mach validation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, LinearSolverError
from .fields import State
from .fluxes import mass_flux
from .mesh import Mesh
from .ops import div_cells, dual_density, dual_momentum_fluxes, flux_divergence, grad_faces
from .stepper import _face_dt_bound, choose_eta, mass_update

Array = np.ndarray


@dataclass
class LimitState:
    """Density, face velocity and zero-mean second-order pressure."""

    rho: Array
    U: list
    pi: Array
    time: float = 0.0
    step_index: int = 0

    def as_state(self) -> State:
        """View as a compressible state with theta = 1/rho (rho*theta = 1)."""
        return State(rho=self.rho, theta=1.0 / self.rho, u=self.U,
                     time=self.time, step_index=self.step_index)


def init_limit_state(mesh: Mesh, case, eps: float = 0.0) -> LimitState:
    """Limit initial data: rho = 1/theta0, U sampled like the velocity."""
    centers = mesh.cell_centers()
    theta0 = np.broadcast_to(np.asarray(case.theta0(*centers, eps), dtype=float),
                             (mesh.n_cells,))
    rho = np.ascontiguousarray(1.0 / theta0)
    U = []
    for d in range(mesh.dim):
        fc = mesh.face_centers(d)
        comp = np.asarray(case.u0[d](*fc, eps), dtype=float)
        U.append(np.broadcast_to(comp, (mesh.n_faces[d],)).copy())
    return LimitState(rho=rho, U=U, pi=np.zeros(mesh.n_cells))


class PressureSolver:
    """Solver for the constant-coefficient MAC pressure system.

    The operator is the (volume-scaled, sign-flipped) discrete div-grad,
    which is symmetric positive semidefinite with the constants as null
    space.  One entry is pinned to fix the gauge; for a compatible right
    hand side the pinned solution solves the original system exactly, and
    the returned pressure is shifted to zero mean.  The matrix is constant
    per mesh, so the AMG hierarchy is built once and reused.
    """

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        n = mesh.n_cells
        idx = np.arange(n)
        rows = [idx]
        cols = [idx]
        diag = np.zeros(n)
        data = [diag]
        for d in range(mesh.dim):
            w = mesh.face_area[d] ** 2 / mesh.dual_volume[d]
            diag += 2.0 * w
            rows.extend([idx, idx])
            cols.extend([mesh.shift_plus[d], mesh.shift_minus[d]])
            data.extend([np.full(n, -w), np.full(n, -w)])
        a = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n, n))
        pin = sp.csr_matrix(([diag[0]], ([0], [0])), shape=(n, n))
        self.matrix = (a + pin).tocsr()
        if n <= 4000:
            self._direct = spla.splu(self.matrix.tocsc())
            self._amg = None
        else:
            import pyamg

            self._direct = None
            self._amg = pyamg.ruge_stuben_solver(self.matrix)

    def solve_poisson(self, rhs: Array, tol: float) -> Array:
        """Solve div grad x = rhs (volume form), zero-mean gauge."""
        b = -self.mesh.cell_volume * rhs
        b = b - b.mean()  # compatibility projection
        if self._direct is not None:
            x = self._direct.solve(b)
        else:
            x, info = spla.cg(self.matrix, b, rtol=tol, atol=0.0,
                              M=self._amg.aspreconditioner(cycle="V"), maxiter=500)
            if info != 0:
                raise LinearSolverError(f"pressure solve stagnated (info = {info})")
        return x - x.mean()


def solve_pressure(mesh: Mesh, U: list, eta: float, dt: float,
                   tol: float = 1e-12, solver: PressureSolver | None = None) -> Array:
    """Second-order pressure from the stabilized divergence constraint.

    Solves eta * dt * div grad pi = div U with zero mean; doubling eta
    halves pi exactly since the operator is constant.
    """
    if eta <= 0.0 or dt <= 0.0:
        raise ConfigurationError("solve_pressure requires eta > 0 and dt > 0")
    if solver is None:
        solver = PressureSolver(mesh)
    div_u = div_cells(mesh, U)
    x = solver.solve_poisson(div_u, tol)
    return x / (eta * dt)


@dataclass
class LimitStepReport:
    dt: float
    eta: float
    kinetic_before: float
    kinetic_after: float
    constraint_residual: float


def limit_mass_update(mesh: Mesh, ls: LimitState, dt: float) -> Array:
    return mass_update(mesh, ls.as_state(), dt)


def limit_momentum_update(mesh: Mesh, ls: LimitState, rho_new: Array,
                          pi_new: Array, dt: float) -> list:
    """Momentum update of the limit scheme (unit pressure scaling)."""
    primal = mass_flux(mesh, ls.rho, ls.U)
    grad_pi = grad_faces(mesh, pi_new)
    out = []
    for d in range(mesh.dim):
        balance = dual_momentum_fluxes(mesh, ls.rho, ls.U, primal, d)
        rho_dual_new = dual_density(mesh, rho_new, d)
        numer = (balance.rho_dual * ls.U[d]
                 - (dt / mesh.dual_volume[d]) * balance.convection(mesh)
                 - dt * grad_pi[d])
        out.append(numer / rho_dual_new)
    return out


def limit_step(mesh: Mesh, ls: LimitState, cfg, dt_cap: float | None = None,
               solver: PressureSolver | None = None, dt: float | None = None):
    """One step of the limit scheme; dt may be imposed for lockstep runs."""
    from .diagnostics import kinetic_energy

    if dt is None:
        bound = _face_dt_bound(mesh, ls.rho, ls.U, cfg.beta)
        dt_max = cfg.dt_max if cfg.dt_max is not None else min(mesh.spacing)
        dt = dt_max if not math.isfinite(bound) else min(bound, dt_max)
        if dt_cap is not None:
            dt = min(dt, dt_cap)
    if dt <= 0.0:
        raise ConfigurationError(f"non-positive time step {dt}")

    state_view = ls.as_state()
    kin_before = kinetic_energy(mesh, state_view)
    rho_new = limit_mass_update(mesh, ls, dt)
    eta = cfg.eta if cfg.eta is not None else choose_eta(mesh, state_view, cfg.eta_floor)
    pi_new = solve_pressure(mesh, ls.U, eta, dt, solver=solver)
    u_new = limit_momentum_update(mesh, ls, rho_new, pi_new, dt)

    shifted = [ls.U[d] - eta * dt * g for d, g in enumerate(grad_faces(mesh, pi_new))]
    constraint = float(np.abs(div_cells(mesh, shifted)).max())

    new_ls = LimitState(rho=rho_new, U=u_new, pi=pi_new,
                        time=ls.time + dt, step_index=ls.step_index + 1)
    kin_after = kinetic_energy(mesh, new_ls.as_state())
    return new_ls, LimitStepReport(dt=dt, eta=eta, kinetic_before=kin_before,
                                   kinetic_after=kin_after,
                                   constraint_residual=constraint)
