"""All-speed semi-implicit MAC finite-volume solver for the compressible
Euler equations with potential temperature transport.

The scheme is asymptotic preserving across Mach numbers: explicit upwind
mass transport, an implicit stabilized solve for the total potential
temperature (which carries the stiff pressure), and an explicit dual-cell
momentum update.  Density and temperature stay positive and the discrete
total energy is non-increasing under the built-in time-step control.
"""

from ._version import __version__
from .cases import CASES, CaseSpec, get_case
from .config import RunConfig, load_config
from .fields import State, eos_pressure, init_state
from .mesh import Mesh, build_uniform_mesh
from .stepper import StepReport, StepWorkspace, choose_eta, compute_dt, step

__all__ = [
    "__version__",
    "CASES",
    "CaseSpec",
    "get_case",
    "RunConfig",
    "load_config",
    "State",
    "eos_pressure",
    "init_state",
    "Mesh",
    "build_uniform_mesh",
    "StepReport",
    "StepWorkspace",
    "choose_eta",
    "compute_dt",
    "step",
]
