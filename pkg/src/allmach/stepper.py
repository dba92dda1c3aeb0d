"""One full time step of the semi-implicit scheme.

Order of a step: CFL time-step bound, explicit upwind mass update, choice of
the stabilization parameter, implicit nonlinear solve for the total potential
temperature (and hence the new pressure), explicit momentum update.

The implicit solve is a semismooth Newton iteration on rho*theta: the
residual is always evaluated with the exact sign-split flux, while the
Jacobian freezes the shift's sign pattern at the current iterate (the
residual is piecewise smooth, so this is plain Newton on the active piece).
Linear systems go to a sparse direct factorization on small meshes and to an
AMG-preconditioned BiCGStab on large ones; the AMG hierarchy is cached across
steps and rebuilt when its preconditioning quality degrades.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import ConfigurationError, CflViolationError, LinearSolverError, NonlinearSolverError
from .fields import State
from .fluxes import mass_flux
from .mesh import Mesh
from .ops import dual_momentum_fluxes, dual_density, flux_divergence, grad_faces

Array = np.ndarray

# Meshes up to this many cells use a direct sparse factorization per Newton
# iteration; larger ones use AMG-preconditioned BiCGStab.
DIRECT_SOLVE_LIMIT = 4000

# Rebuild the cached AMG hierarchy when BiCGStab needs more iterations.
AMG_REFRESH_ITERS = 18


@dataclass
class StepReport:
    """Per-step record of what the stepper did."""

    dt: float
    eta: float
    newton_iterations: int
    newton_residual: float
    positivity_ok: bool
    energy_before: float | None
    energy_after: float | None
    cfl_margin: float


class StepWorkspace:
    """Caches reusable across steps: sparsity pattern and AMG hierarchy."""

    def __init__(self, mesh: Mesh):
        idx = np.arange(mesh.n_cells)
        rows = [idx]
        cols = [idx]
        for d in range(mesh.dim):
            rows.append(idx)
            cols.append(mesh.face_neighbor[d])
            rows.append(idx)
            cols.append(mesh.shift_minus[d])
        self.rows = np.concatenate(rows)
        self.cols = np.concatenate(cols)
        self.n = mesh.n_cells
        self.amg = None

    def matrix(self, blocks) -> sp.csr_matrix:
        data = np.concatenate(blocks)
        return sp.csr_matrix((data, (self.rows, self.cols)), shape=(self.n, self.n))


def _face_dt_bound(mesh: Mesh, rho: Array, u: list, beta: float) -> float:
    """Tightest per-face bound of the sufficient CFL condition (inf if free)."""
    ratio_factor = beta / (1.0 + beta)
    perim = mesh.perimeter_ratio()
    best = math.inf
    for d in range(mesh.dim):
        au = np.abs(u[d])
        mask = au > 0.0
        if not mask.any():
            continue
        rk = rho[mask]
        rl = rho[mesh.face_neighbor[d]][mask]
        ratio = np.minimum(rk, rl) / np.maximum(rk, rl)
        with np.errstate(over="ignore"):
            # subnormal |u| overflows the quotient to inf; min() drops it
            best = min(best, float(np.min(ratio_factor * ratio / (perim * au[mask]))))
    return best


def compute_dt(mesh: Mesh, state: State, beta: float, dt_max: float,
               safety: float = 1.0) -> float:
    """Admissible time step from the sufficient CFL condition.

    Per internal face: dt * max(|bd K|/|K|, |bd L|/|L|) * |u| <=
    beta/(1+beta) * min(rho_K, rho_L)/max(rho_K, rho_L).  Faces with zero
    velocity impose nothing; a fully quiescent state returns ``dt_max``.
    """
    if not 0.0 < beta <= 0.5:
        raise ConfigurationError(f"beta = {beta} outside (0, 1/2]")
    bound = _face_dt_bound(mesh, state.rho, state.u, beta)
    if not math.isfinite(bound):
        return dt_max
    return min(safety * bound, dt_max)


def mass_update(mesh: Mesh, state: State, dt: float) -> Array:
    """Explicit upwind density update; conservative by telescoping."""
    fluxes = mass_flux(mesh, state.rho, state.u)
    rho_new = state.rho - dt * flux_divergence(mesh, fluxes)
    if not np.all(rho_new > 0.0):
        raise CflViolationError(
            f"density positivity lost at t = {state.time} (dt = {dt}); "
            "the time step violates the CFL bound")
    return rho_new


def choose_eta(mesh: Mesh, state: State, eta_floor: float = 0.0) -> float:
    """Stabilization parameter from the lower bound 3 / (2 min dual density)."""
    rho_dual_min = min(float(dual_density(mesh, state.rho, d).min())
                       for d in range(mesh.dim))
    return max(eta_floor, 1.5 / rho_dual_min)


@dataclass
class ImplicitSolveResult:
    theta_total: Array
    pressure: Array
    iterations: int
    residual: float


def _solve_linear(workspace: StepWorkspace, matrix: sp.csr_matrix, rhs: Array,
                  rtol: float = 1e-12) -> Array:
    if workspace.n <= DIRECT_SOLVE_LIMIT:
        return spla.splu(matrix.tocsc()).solve(rhs)

    import pyamg

    def run(ml):
        count = [0]

        def cb(_):
            count[0] += 1

        x, info = spla.bicgstab(matrix, rhs, rtol=rtol, atol=0.0,
                                M=ml.aspreconditioner(cycle="V"),
                                maxiter=200, callback=cb)
        return x, info, count[0]

    if workspace.amg is None:
        workspace.amg = pyamg.ruge_stuben_solver(matrix)
    x, info, iters = run(workspace.amg)
    if info != 0 or iters > AMG_REFRESH_ITERS:
        workspace.amg = pyamg.ruge_stuben_solver(matrix)
        if info != 0:
            x, info, iters = run(workspace.amg)
    if info != 0:
        # last resort: direct solve is slow here but always applicable
        try:
            x = spla.splu(matrix.tocsc()).solve(rhs)
        except RuntimeError as exc:
            raise LinearSolverError(f"Newton linear solve failed: {exc}") from exc
    return x


def solve_theta_implicit(mesh: Mesh, state: State, rho_new: Array, dt: float,
                         eta: float, eps: float, gamma: float,
                         tol: float | None = None, max_iter: int = 50,
                         workspace: StepWorkspace | None = None) -> ImplicitSolveResult:
    """Solve the implicit stabilized transport equation for rho*theta.

    Newton iterations stop once the residual max-norm is at or below ``tol``,
    the shift sign pattern is stable between iterates, and the (linear)
    conservation defect of the iterate is negligible.  The returned pressure
    is the new total potential temperature raised to ``gamma``.
    """
    if workspace is None:
        workspace = StepWorkspace(mesh)
    if not np.all(rho_new > 0.0):
        raise CflViolationError("implicit solve requires a positive updated density")
    theta_old = np.ascontiguousarray(state.rho * state.theta)
    theta = theta_old.copy()
    vol = mesh.cell_volume
    total_old = vol * float(theta_old.sum())
    scale = max(1.0, float(np.abs(theta_old).max()) / dt)
    if tol is None:
        tol = 1e-11 * scale
    # residuals below a few ulps of (theta / dt) are not representable
    tol = max(tol, 8.0 * np.finfo(float).eps * scale)
    # per-step conservation guard: run-level drift budgets are O(1e-11)
    # relative over hundreds of steps, so each step gets a few 1e-14
    drift_limit = 3e-14 * abs(total_old)

    inv_dt = 1.0 / dt
    shift_coeff = [eta * dt * mesh.face_area[d] / (eps * eps * mesh.dual_volume[d])
                   for d in range(mesh.dim)]
    u = [np.ascontiguousarray(state.u[d]) for d in range(mesh.dim)]

    def residual_only(th):
        p = th ** gamma
        r = (th - theta_old) * inv_dt
        for d in range(mesh.dim):
            nbr = mesh.face_neighbor[d]
            g = kernels.temp_face_flux(th, th[nbr], p, u[d],
                                       shift_coeff[d], gamma, mesh.face_area[d])
            r += (g - g[mesh.shift_minus[d]]) / vol
        return r

    prev_signs = None
    iterations = 0
    rnorm = math.inf
    eps_mach = float(np.finfo(float).eps)
    for _ in range(max_iter + 1):
        p = theta ** gamma
        q = gamma * theta ** (gamma - 1.0)
        res = (theta - theta_old) * inv_dt
        diag = np.full(mesh.n_cells, inv_dt)
        blocks = [diag]
        signs = []
        for d in range(mesh.dim):
            nbr = mesh.face_neighbor[d]
            sm = mesh.shift_minus[d]
            g, d_own, d_nbr, neg = kernels.temp_face_flux_jac(
                theta, theta[nbr], p, q, q[nbr], u[d],
                shift_coeff[d], gamma, mesh.face_area[d])
            res += (g - g[sm]) / vol
            diag += (d_own - d_nbr[sm]) / vol
            blocks.append(d_nbr / vol)
            blocks.append(-d_own[sm] / vol)
            signs.append(neg)
        rnorm = float(np.abs(res).max())
        drift = abs(vol * float(theta.sum()) - total_old)
        signs_stable = prev_signs is None or all(
            np.array_equal(s, ps) for s, ps in zip(signs, prev_signs))
        prev_signs = signs
        # The residual cannot resolve below its sensitivity to one ulp of
        # theta; in the stiff low-Mach regime that quantization floor far
        # exceeds any practical tolerance, and an iterate sitting on it is
        # the solution to rounding.
        floor = 4.0 * eps_mach * float(np.abs(diag).max()) \
            * max(1.0, float(np.abs(theta).max()))
        if rnorm <= floor:
            # at the floor the shift signs are set by ulp-level gradient
            # noise; donor flips there change fluxes by rounding only
            signs_stable = True
        if (rnorm <= tol or rnorm <= floor) and signs_stable:
            if drift <= drift_limit:
                return ImplicitSolveResult(theta, p, iterations, rnorm)
            # conservation defect is linear in theta: one tight Newton
            # correction removes it without changing the residual floor
            delta = _solve_linear(workspace, workspace.matrix(blocks), -res,
                                  rtol=1e-12)
            iterations += 1
            trial = theta + delta
            if np.all(trial > 0.0):
                theta = trial
                p = theta ** gamma
                rnorm = float(np.abs(residual_only(theta)).max())
            return ImplicitSolveResult(theta, p, iterations, rnorm)
        if iterations >= max_iter:
            break

        # inexact Newton: solve loosely while far from the tolerance
        lin_rtol = 1e-3 if rnorm > 1e3 * max(tol, floor) else 1e-12
        delta = _solve_linear(workspace, workspace.matrix(blocks), -res, rtol=lin_rtol)
        iterations += 1

        alpha = 1.0
        accepted = False
        while alpha >= 1e-8:
            trial = theta + alpha * delta
            if np.all(trial > 0.0):
                trial_norm = float(np.abs(residual_only(trial)).max())
                if (trial_norm <= rnorm * (1.0 - 1e-4 * alpha)
                        or trial_norm <= max(0.5 * tol, floor)):
                    theta = trial
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            raise NonlinearSolverError(
                f"damped Newton made no progress at t = {state.time} "
                f"(residual {rnorm:.3e})", residual=rnorm, iterations=iterations)

    raise NonlinearSolverError(
        f"implicit temperature solve did not converge in {max_iter} iterations "
        f"(residual {rnorm:.3e}, tol {tol:.3e})", residual=rnorm, iterations=iterations)


def momentum_update(mesh: Mesh, state: State, rho_new: Array, p_new: Array,
                    dt: float, eps: float, theta_total: Array | None = None,
                    gamma: float | None = None) -> list:
    """Explicit dual-cell momentum update with the new pressure gradient.

    When the new total potential temperature and gamma are supplied, the
    pressure differences are formed cancellation-free from them (the raw
    p differences lose all significance near the incompressible limit).
    """
    primal = mass_flux(mesh, state.rho, state.u)
    if theta_total is not None:
        grad_p = []
        for d in range(mesh.dim):
            dp = kernels.pressure_diff(theta_total, theta_total[mesh.face_neighbor[d]],
                                       p_new, gamma)
            grad_p.append((mesh.face_area[d] / mesh.dual_volume[d]) * dp)
    else:
        grad_p = grad_faces(mesh, p_new)
    inv_eps2 = 1.0 / (eps * eps)
    u_new = []
    for d in range(mesh.dim):
        balance = dual_momentum_fluxes(mesh, state.rho, state.u, primal, d)
        rho_dual_new = dual_density(mesh, rho_new, d)
        numer = (balance.rho_dual * state.u[d]
                 - (dt / mesh.dual_volume[d]) * balance.convection(mesh)
                 - dt * inv_eps2 * grad_p[d])
        u_new.append(numer / rho_dual_new)
    return u_new


def step(mesh: Mesh, state: State, cfg, dt_cap: float | None = None,
         workspace: StepWorkspace | None = None):
    """Advance one time step; returns (new state, report).

    ``cfg`` provides gamma, eps, beta, dt_max, eta policy and Newton
    controls (see RunConfig).  A failed sub-step raises and leaves the input
    state untouched.  ``dt_cap`` additionally limits the step, e.g. to land
    exactly on an output time.
    """
    from .diagnostics import total_energy

    bound = _face_dt_bound(mesh, state.rho, state.u, cfg.beta)
    dt_max = cfg.dt_max if cfg.dt_max is not None else min(mesh.spacing)
    dt = dt_max if not math.isfinite(bound) else min(bound, dt_max)
    if dt_cap is not None:
        dt = min(dt, dt_cap)
    if dt <= 0.0:
        raise ConfigurationError(f"non-positive time step {dt}")

    energy_before = None
    if cfg.gamma > 1.0:
        energy_before = total_energy(mesh, state, cfg.eps, cfg.gamma)

    rho_new = mass_update(mesh, state, dt)
    eta = cfg.eta if cfg.eta is not None else choose_eta(mesh, state, cfg.eta_floor)
    solve = solve_theta_implicit(mesh, state, rho_new, dt, eta, cfg.eps, cfg.gamma,
                                 tol=cfg.newton_tol, max_iter=cfg.newton_max_iter,
                                 workspace=workspace)
    u_new = momentum_update(mesh, state, rho_new, solve.pressure, dt, cfg.eps,
                            theta_total=solve.theta_total, gamma=cfg.gamma)
    theta_new = solve.theta_total / rho_new

    positivity_ok = bool(np.all(rho_new > 0.0) and np.all(theta_new > 0.0))
    if not positivity_ok:
        raise CflViolationError(f"positivity lost after step at t = {state.time}")

    new_state = State(rho=rho_new, theta=theta_new, u=u_new,
                      time=state.time + dt, step_index=state.step_index + 1)
    energy_after = None
    if cfg.gamma > 1.0:
        energy_after = total_energy(mesh, new_state, cfg.eps, cfg.gamma)

    report = StepReport(dt=dt, eta=eta,
                        newton_iterations=solve.iterations,
                        newton_residual=solve.residual,
                        positivity_ok=positivity_ok,
                        energy_before=energy_before,
                        energy_after=energy_after,
                        cfl_margin=0.0 if not math.isfinite(bound) else dt / bound)
    return new_state, report
