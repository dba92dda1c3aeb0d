"""Explicit Rusanov finite-volume reference solver (1D, conservative form).

Works on the conservative variables (rho, rho*u, rho*theta) with the scaled
pressure p/eps^2 in the momentum flux and wave speed |u| + c/eps, c =
sqrt(gamma p / rho).  Used to produce fine-grid reference profiles for the
compressible benchmark comparisons (eps = 1, where the scaling is benign).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SolverError
from .mesh import build_uniform_mesh

Array = np.ndarray


@dataclass
class ConservativeState1D:
    rho: Array
    momentum: Array
    rho_theta: Array
    time: float = 0.0

    @property
    def velocity(self) -> Array:
        return self.momentum / self.rho

    @property
    def theta(self) -> Array:
        return self.rho_theta / self.rho


def _physical_flux(w: ConservativeState1D, eps: float, gamma: float):
    u = w.velocity
    p = w.rho_theta ** gamma
    return (w.momentum,
            w.momentum * u + p / (eps * eps),
            w.rho_theta * u)


def rusanov_flux(left: ConservativeState1D, right: ConservativeState1D,
                 eps: float, gamma: float):
    """Central flux plus maximal-wave-speed dissipation, componentwise."""
    f_l = _physical_flux(left, eps, gamma)
    f_r = _physical_flux(right, eps, gamma)
    c_l = np.sqrt(gamma * left.rho_theta ** gamma / left.rho)
    c_r = np.sqrt(gamma * right.rho_theta ** gamma / right.rho)
    lam = np.maximum(np.abs(left.velocity) + c_l / eps,
                     np.abs(right.velocity) + c_r / eps)
    w_l = (left.rho, left.momentum, left.rho_theta)
    w_r = (right.rho, right.momentum, right.rho_theta)
    return tuple(0.5 * (fl + fr) - 0.5 * lam * (wr - wl)
                 for fl, fr, wl, wr in zip(f_l, f_r, w_l, w_r))


def run_reference(case, n_cells: int, t_end: float, cfl: float = 0.45,
                  eps: float = 1.0, gamma: float | None = None):
    """Forward-Euler Rusanov run; returns (cell centers, final state)."""
    if case.dim != 1:
        raise ConfigurationError(f"reference solver is 1D only, case {case.name} is {case.dim}D")
    gamma = case.gamma if gamma is None else gamma
    mesh = build_uniform_mesh(case.extents, (n_cells,))
    (x,) = mesh.cell_centers()
    h = mesh.spacing[0]
    rho = np.asarray(case.rho0(x, eps), dtype=float) * np.ones_like(x)
    theta = np.asarray(case.theta0(x, eps), dtype=float) * np.ones_like(x)
    u = np.asarray(case.u0[0](x, eps), dtype=float) * np.ones_like(x)
    state = ConservativeState1D(rho=rho, momentum=rho * u, rho_theta=rho * theta)

    roll = mesh.shift_plus[0]
    back = mesh.shift_minus[0]
    t = 0.0
    while t < t_end - 1e-14:
        right = ConservativeState1D(state.rho[roll], state.momentum[roll],
                                    state.rho_theta[roll], state.time)
        c = np.sqrt(gamma * state.rho_theta ** gamma / state.rho)
        lam_max = float(np.max(np.abs(state.velocity) + c / eps))
        dt = min(cfl * h / lam_max, t_end - t)
        fluxes = rusanov_flux(state, right, eps, gamma)
        new_fields = []
        for w, f in zip((state.rho, state.momentum, state.rho_theta), fluxes):
            new_fields.append(w - (dt / h) * (f - f[back]))
        state = ConservativeState1D(*new_fields, time=t + dt)
        t += dt
        if not (np.all(state.rho > 0.0) and np.all(state.rho_theta > 0.0)):
            raise SolverError(f"reference solver lost positivity at t = {t}")
    return x, state
