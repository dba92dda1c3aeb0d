"""Catalog of the benchmark cases: analytic initial data and defaults.

Each case provides pointwise initial fields.  Where the underlying problem
prescribes the pressure-like datum (rho*theta)^gamma instead of theta, the
temperature is recovered as datum^(1/gamma) / rho.  Discontinuous 1D data
place the jumps exactly on cell boundaries for the default grids; faces that
land on a jump take the two-sided mean, matching dual-cell averaging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

Array = np.ndarray

_JUMP_TOL = 1e-12


@dataclass(frozen=True)
class CaseSpec:
    """Benchmark definition: domain, parameters, and initial fields."""

    name: str
    dim: int
    extents: tuple
    counts: tuple
    gamma: float
    eps_list: tuple
    t_end: float
    snapshot_times: tuple
    rho0: object
    theta0: object
    u0: tuple
    stationary: bool = False
    artifacts: tuple = ()

    @property
    def eps_default(self) -> float:
        return self.eps_list[0]


def case_colliding_pulses() -> CaseSpec:
    """Two counter-propagating acoustic pulses on a periodic line."""
    gamma = 1.4

    def rho0(x, eps):
        return 0.955 + 0.5 * eps * (1.0 - np.cos(2.0 * np.pi * x))

    def u0(x, eps):
        return -np.sign(x) * np.sqrt(gamma) * (1.0 - np.cos(2.0 * np.pi * x))

    def theta0(x, eps):
        datum = 1.0 + eps * gamma * (1.0 - np.cos(2.0 * np.pi * x))
        return datum ** (1.0 / gamma) / rho0(x, eps)

    return CaseSpec(
        name="colliding-pulses", dim=1, extents=((-1.0, 1.0),), counts=(200,),
        gamma=gamma, eps_list=(0.1,), t_end=0.08, snapshot_times=(0.04, 0.08),
        rho0=rho0, theta0=theta0, u0=(u0,),
        artifacts=("profile-panels",),
    )


def case_extreme_riemann() -> CaseSpec:
    """Strong symmetric rarefaction: velocity +-2 pulling apart at mid-domain."""

    def rho0(x, eps):
        return np.ones_like(np.asarray(x, dtype=float))

    def theta0(x, eps):
        return np.full_like(np.asarray(x, dtype=float), 0.52)

    def u0(x, eps):
        x = np.asarray(x, dtype=float)
        u = np.where(x < 0.5, -2.0, 2.0)
        # jump faces (mid-domain and the periodic wrap) take the two-sided mean
        on_jump = (np.abs(x - 0.5) < _JUMP_TOL) | (np.abs(x) < _JUMP_TOL) \
            | (np.abs(x - 1.0) < _JUMP_TOL)
        return np.where(on_jump, 0.0, u)

    return CaseSpec(
        name="extreme-riemann", dim=1, extents=((0.0, 1.0),), counts=(100,),
        gamma=1.4, eps_list=(1.0,), t_end=0.15, snapshot_times=(0.15,),
        rho0=rho0, theta0=theta0, u0=(u0,),
        artifacts=("profile-panels",),
    )


def case_riemann_1d() -> CaseSpec:
    """Small symmetric velocity perturbation; compressible and low-Mach runs."""

    def rho0(x, eps):
        return np.ones_like(np.asarray(x, dtype=float))

    def theta0(x, eps):
        return np.ones_like(np.asarray(x, dtype=float))

    def u0(x, eps):
        x = np.asarray(x, dtype=float)
        lo = 1.0 - 0.5 * eps * eps
        hi = 1.0 + 0.5 * eps * eps
        out = np.ones_like(x)
        out = np.where((x <= 0.2) | (x >= 0.8), lo, out)
        out = np.where((x >= 0.25) & (x <= 0.75), hi, out)
        return out

    return CaseSpec(
        name="riemann-1d", dim=1, extents=((0.0, 1.0),), counts=(300,),
        gamma=1.4, eps_list=(1.0, 0.01), t_end=0.05, snapshot_times=(0.05,),
        rho0=rho0, theta0=theta0, u0=(u0,),
        artifacts=("profile-panels", "reference-overlay"),
    )


# stationary vortex geometry
_VORTEX_A = 0.1
_VORTEX_R1 = 0.2
_VORTEX_R2 = 0.4
_VORTEX_A1 = _VORTEX_A / _VORTEX_R1
_VORTEX_A2 = -_VORTEX_A * _VORTEX_R2 / (_VORTEX_R1 - _VORTEX_R2)
_VORTEX_A3 = _VORTEX_A / (_VORTEX_R1 - _VORTEX_R2)
_VORTEX_CENTER = (0.5, 0.5)


def vortex_angular_velocity(r):
    """Piecewise-linear angular velocity profile of the vortex."""
    r = np.asarray(r, dtype=float)
    mid = _VORTEX_A2 + _VORTEX_A3 * r
    return np.where(r <= _VORTEX_R1, _VORTEX_A1 * r,
                    np.where(r <= _VORTEX_R2, mid, 0.0))


def vortex_centripetal_integral(r):
    """Closed form of int_0^r u_angular(s)^2 / s ds, piecewise.

    Validated against adaptive quadrature in the test suite.
    """
    r = np.asarray(r, dtype=float)
    a1, a2, a3 = _VORTEX_A1, _VORTEX_A2, _VORTEX_A3
    r1, r2 = _VORTEX_R1, _VORTEX_R2
    i_r1 = 0.5 * a1 ** 2 * r1 ** 2

    def mid(rr):
        rr = np.maximum(rr, r1)
        return (i_r1 + a2 ** 2 * np.log(rr / r1) + 2.0 * a2 * a3 * (rr - r1)
                + 0.5 * a3 ** 2 * (rr ** 2 - r1 ** 2))

    i_r2 = float(mid(np.asarray(r2)))
    return np.where(r <= r1, 0.5 * a1 ** 2 * r ** 2,
                    np.where(r <= r2, mid(r), i_r2))


def case_stationary_vortex() -> CaseSpec:
    """Radially symmetric vortex in centripetal balance; exactly stationary."""
    xc, yc = _VORTEX_CENTER

    def radius(x, y):
        return np.sqrt((x - xc) ** 2 + (y - yc) ** 2)

    def rho0(x, y, eps):
        return 1.0 + 0.5 * eps * eps * vortex_centripetal_integral(radius(x, y))

    def theta0(x, y, eps):
        return np.ones_like(np.asarray(x, dtype=float))

    def angular_over_r(r):
        # u_angular(r) / r, finite at the origin
        r_safe = np.maximum(r, 1e-300)
        mid = (_VORTEX_A2 + _VORTEX_A3 * r) / r_safe
        return np.where(r <= _VORTEX_R1, _VORTEX_A1,
                        np.where(r <= _VORTEX_R2, mid, 0.0))

    def u0(x, y, eps):
        r = radius(x, y)
        return angular_over_r(r) * (y - yc)

    def v0(x, y, eps):
        r = radius(x, y)
        return -angular_over_r(r) * (x - xc)

    return CaseSpec(
        name="stationary-vortex", dim=2, extents=((0.0, 1.0), (0.0, 1.0)),
        counts=(100, 100), gamma=2.0, eps_list=(1e-1, 1e-2, 1e-3, 1e-4),
        t_end=1.0, snapshot_times=(1.0,),
        rho0=rho0, theta0=theta0, u0=(u0, v0), stationary=True,
        artifacts=("convergence-table", "mach-pseudocolor",
                   "kinetic-energy-series", "deviation-decay", "limit-comparison"),
    )


def case_cylindrical_explosion() -> CaseSpec:
    """Radial velocity pulse; compressible shock or near-incompressible flow."""

    def radius(x, y):
        return np.sqrt(np.asarray(x, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2)

    def rho0(x, y, eps):
        return np.where(radius(x, y) <= 0.5, 1.0 + eps * eps, 1.0)

    def theta0(x, y, eps):
        return np.ones_like(np.asarray(x, dtype=float))

    def _radial_speed(x, y, eps):
        r = radius(x, y)
        alpha = np.maximum(0.0, 1.0 - r) * (1.0 - np.exp(-16.0 * r ** 2))
        gate = r > 1e-15
        r_safe = np.where(gate, r, 1.0)
        return np.where(gate, -alpha / rho0(x, y, eps) / r_safe, 0.0)

    def u0(x, y, eps):
        return _radial_speed(x, y, eps) * np.asarray(x, dtype=float)

    def v0(x, y, eps):
        return _radial_speed(x, y, eps) * np.asarray(y, dtype=float)

    return CaseSpec(
        name="cylindrical-explosion", dim=2, extents=((-1.0, 1.0), (-1.0, 1.0)),
        counts=(200, 200), gamma=1.0, eps_list=(1.0, 1e-4),
        t_end=0.05, snapshot_times=(0.05,),
        rho0=rho0, theta0=theta0, u0=(u0, v0),
        artifacts=("field-pseudocolor", "deviation-surface", "divergence-surface"),
    )


def case_baroclinic() -> CaseSpec:
    """Acoustic wave over a stratified density interface; weakly compressible."""
    gamma = 1.4

    def stratification(y):
        y = np.asarray(y, dtype=float)
        return np.where(y <= 0.2, 4.5 * y, 4.5 * y - 1.8)

    def rho0(x, y, eps):
        return 1.0 + (eps / 2000.0) * (1.0 + np.cos(np.pi * x)) + stratification(y)

    def theta0(x, y, eps):
        datum = 1.0 + 0.5 * eps * gamma * (1.0 + np.cos(np.pi * x))
        return datum ** (1.0 / gamma) / rho0(x, y, eps)

    def u0(x, y, eps):
        return 0.5 * np.sqrt(gamma) * (1.0 + np.cos(np.pi * x)) \
            * np.ones_like(np.asarray(y, dtype=float))

    def v0(x, y, eps):
        return np.zeros_like(np.asarray(x, dtype=float))

    return CaseSpec(
        name="baroclinic", dim=2, extents=((-1.0, 1.0), (0.0, 0.4)),
        counts=(800, 160), gamma=gamma, eps_list=(0.05,),
        t_end=1.0, snapshot_times=(0.5, 1.0),
        rho0=rho0, theta0=theta0, u0=(u0, v0),
        artifacts=("field-pseudocolor",),
    )


CASES = {
    "colliding-pulses": case_colliding_pulses,
    "extreme-riemann": case_extreme_riemann,
    "riemann-1d": case_riemann_1d,
    "stationary-vortex": case_stationary_vortex,
    "cylindrical-explosion": case_cylindrical_explosion,
    "baroclinic": case_baroclinic,
}


def get_case(name: str) -> CaseSpec:
    try:
        factory = CASES[name]
    except KeyError:
        known = ", ".join(sorted(CASES))
        raise ConfigurationError(f"unknown case '{name}' (known: {known})") from None
    return factory()
