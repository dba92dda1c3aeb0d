"""Hot per-face kernels: compiled extension with a numpy fallback.

The compiled backend is selected at import time unless ``ALLMACH_PURE`` is
set in the environment or the extension is unavailable.  Both backends are
drop-in equivalent; ``BACKEND`` names the active one.
"""

import os

if os.environ.get("ALLMACH_PURE"):
    from . import _numpy as _impl
else:
    try:
        from . import _compiled as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _numpy as _impl

BACKEND = _impl.BACKEND
mass_face_flux = _impl.mass_face_flux
pressure_diff = _impl.pressure_diff
temp_face_flux = _impl.temp_face_flux
temp_face_flux_jac = _impl.temp_face_flux_jac
upwind_select = _impl.upwind_select

__all__ = [
    "BACKEND",
    "mass_face_flux",
    "pressure_diff",
    "temp_face_flux",
    "temp_face_flux_jac",
    "upwind_select",
]
