"""Scalar and field diagnostics: energies, norms, Mach number, ledgers."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import UnsupportedDiagnosticError
from .fields import State, eos_pressure
from .mesh import Mesh
from .ops import div_cells, dual_density

Array = np.ndarray


def helmholtz(z, gamma: float):
    """Internal energy per unit volume z**gamma / (gamma - 1), gamma > 1."""
    if gamma <= 1.0:
        raise UnsupportedDiagnosticError("helmholtz energy requires gamma > 1")
    z = np.asarray(z, dtype=float)
    if not np.all(z > 0.0):
        raise ValueError("helmholtz energy requires positive argument")
    out = z ** gamma / (gamma - 1.0)
    return float(out) if out.ndim == 0 else out


def relative_internal_energy(z, gamma: float):
    """Nonnegative affine correction of the Helmholtz energy about z = 1.

    Vanishes exactly at z = 1 and is convex, which makes it the natural
    distance of rho*theta from the incompressible background state.
    """
    psi_z = helmholtz(z, gamma)
    psi_one = 1.0 / (gamma - 1.0)
    dpsi_one = gamma / (gamma - 1.0)
    z = np.asarray(z, dtype=float)
    out = psi_z - psi_one - dpsi_one * (z - 1.0)
    return float(out) if np.ndim(out) == 0 else out


def kinetic_energy(mesh: Mesh, state: State) -> float:
    """Dual-cell kinetic energy sum over all directions."""
    total = 0.0
    for d in range(mesh.dim):
        rho_dual = dual_density(mesh, state.rho, d)
        total += float(np.sum(mesh.dual_volume[d] * 0.5 * rho_dual * state.u[d] ** 2))
    return total


def internal_energy(mesh: Mesh, state: State, eps: float, gamma: float) -> float:
    """Scaled relative internal energy (1/eps^2) sum |K| Pi(rho theta)."""
    pi = relative_internal_energy(state.theta_total, gamma)
    return float(np.sum(mesh.cell_volume * pi)) / (eps * eps)


def total_energy(mesh: Mesh, state: State, eps: float, gamma: float) -> float:
    """Discrete total energy; defined for gamma > 1 only."""
    return internal_energy(mesh, state, eps, gamma) + kinetic_energy(mesh, state)


def lgamma_norm(mesh: Mesh, f: Array, gamma: float) -> float:
    """Discrete L^gamma norm (sum |K| |f|^gamma)^(1/gamma), gamma >= 1."""
    if gamma < 1.0:
        raise ValueError("lgamma_norm requires gamma >= 1")
    return float(np.sum(mesh.cell_volume * np.abs(f) ** gamma) ** (1.0 / gamma))


def cell_velocity(mesh: Mesh, state: State) -> list:
    """Cell-centered velocity components: mean of the two bounding faces."""
    out = []
    for d in range(mesh.dim):
        u = state.u[d]
        out.append(0.5 * (u + u[mesh.shift_minus[d]]))
    return out


def mach_field(mesh: Mesh, state: State, eps: float, gamma: float) -> Array:
    """Cellwise flow Mach number sqrt(|u|^2 / (gamma p / rho))."""
    p = eos_pressure(state.theta_total, gamma)
    speed_sq = np.zeros(mesh.n_cells)
    for uc in cell_velocity(mesh, state):
        speed_sq += uc ** 2
    return np.sqrt(speed_sq / (gamma * p / state.rho))


@dataclass
class DiagnosticsRecord:
    """Per-step conserved totals, energies, and solver counters."""

    time: float
    step: int
    dt: float
    eta: float
    total_mass: float
    total_theta: float
    momentum: list
    kinetic_energy: float
    internal_energy: float | None
    total_energy: float | None
    lgamma_dev: float
    max_dev: float
    max_div: float
    min_rho: float
    min_theta: float
    newton_iterations: int

    def to_dict(self):
        return asdict(self)


def make_record(mesh: Mesh, state: State, eps: float, gamma: float,
                dt: float = 0.0, eta: float = 0.0,
                newton_iterations: int = 0) -> DiagnosticsRecord:
    vol = mesh.cell_volume
    momentum = []
    for d in range(mesh.dim):
        rho_dual = dual_density(mesh, state.rho, d)
        momentum.append(float(np.sum(mesh.dual_volume[d] * rho_dual * state.u[d])))
    kin = kinetic_energy(mesh, state)
    if gamma > 1.0:
        internal = internal_energy(mesh, state, eps, gamma)
        total = kin + internal
    else:
        internal = None
        total = None
    return DiagnosticsRecord(
        time=state.time,
        step=state.step_index,
        dt=dt,
        eta=eta,
        total_mass=float(np.sum(vol * state.rho)),
        total_theta=float(np.sum(vol * state.theta_total)),
        momentum=momentum,
        kinetic_energy=kin,
        internal_energy=internal,
        total_energy=total,
        lgamma_dev=lgamma_norm(mesh, state.theta_total - 1.0, max(gamma, 1.0)),
        max_dev=float(np.abs(state.theta_total - 1.0).max()),
        max_div=float(np.abs(div_cells(mesh, state.u)).max()),
        min_rho=float(state.rho.min()),
        min_theta=float(state.theta.min()),
        newton_iterations=newton_iterations,
    )
