"""Discrete unknowns (cell scalars, face velocities) and their initialization.

``CellField`` is a flat float64 array over primal cells; ``FaceField`` a list
of per-direction flat arrays over the faces of each direction.  Initial data
are midpoint evaluations of the case's analytic fields at cell and face
centers (a second-order approximation of the prescribed cell/dual-cell
averages).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInitialDataError
from .mesh import Mesh

Array = np.ndarray
CellField = np.ndarray
FaceField = list  # list[Array], one component per direction


@dataclass
class State:
    """One time level of the discrete solution.

    Invariant: ``rho > 0`` and ``theta > 0`` everywhere; checked after every
    update by the stepper.
    """

    rho: Array
    theta: Array
    u: FaceField
    time: float = 0.0
    step_index: int = 0

    @property
    def theta_total(self) -> Array:
        """Conserved product rho * theta."""
        return self.rho * self.theta

    def copy(self) -> "State":
        return State(self.rho.copy(), self.theta.copy(),
                     [c.copy() for c in self.u], self.time, self.step_index)


def zero_face_field(mesh: Mesh) -> FaceField:
    return [np.zeros(mesh.n_faces[d]) for d in range(mesh.dim)]


def init_state(mesh: Mesh, case, eps: float) -> State:
    """Sample a case's initial fields onto the mesh.

    Cell values are midpoint evaluations at cell centers, face velocities
    midpoint evaluations of the matching component at face centers.
    """
    centers = mesh.cell_centers()
    rho = np.asarray(case.rho0(*centers, eps), dtype=float)
    theta = np.asarray(case.theta0(*centers, eps), dtype=float)
    rho = np.broadcast_to(rho, (mesh.n_cells,)).copy()
    theta = np.broadcast_to(theta, (mesh.n_cells,)).copy()
    if not np.all(rho > 0.0):
        raise InvalidInitialDataError(f"case {case.name}: sampled rho0 has non-positive values")
    if not np.all(theta > 0.0):
        raise InvalidInitialDataError(f"case {case.name}: sampled theta0 has non-positive values")
    u = []
    for d in range(mesh.dim):
        fc = mesh.face_centers(d)
        comp = np.asarray(case.u0[d](*fc, eps), dtype=float)
        u.append(np.broadcast_to(comp, (mesh.n_faces[d],)).copy())
    return State(rho=rho, theta=theta, u=u, time=0.0, step_index=0)


def eos_pressure(theta_total: Array, gamma: float) -> Array:
    """Equation of state p = (rho * theta) ** gamma, elementwise."""
    theta_total = np.asarray(theta_total, dtype=float)
    if gamma < 1.0:
        raise ValueError(f"gamma = {gamma} < 1 is outside the model range")
    if not np.all(theta_total > 0.0):
        raise ValueError("equation of state requires rho * theta > 0")
    return theta_total ** gamma
