# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the per-face hot kernels (see ``_numpy`` for the spec).

Fuses the gather-compute chains of the flux/Jacobian assembly into single
passes over the face arrays; used automatically when built.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport expm1, log1p

cnp.import_array()

BACKEND = "compiled"


cdef inline double _pressure_diff(double theta_owner, double theta_neighbor,
                                  double p_owner, double gamma) nogil:
    # cancellation-free p_L - p_K; see the numpy backend for the rationale
    if gamma == 2.0:
        return (theta_neighbor - theta_owner) * (theta_neighbor + theta_owner)
    if gamma == 1.0:
        return theta_neighbor - theta_owner
    return p_owner * expm1(gamma * log1p((theta_neighbor - theta_owner) / theta_owner))


def pressure_diff(double[::1] theta_owner, double[::1] theta_neighbor,
                  double[::1] p_owner, double gamma):
    cdef Py_ssize_t n = theta_owner.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = _pressure_diff(theta_owner[i], theta_neighbor[i], p_owner[i], gamma)
    return out_arr


def mass_face_flux(double[::1] rho_owner, double[::1] rho_neighbor,
                   double[::1] u, double area):
    cdef Py_ssize_t n = u.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double ui, up, um
    # expression shape matches the numpy backend bit for bit
    for i in range(n):
        ui = u[i]
        up = ui if ui > 0.0 else 0.0
        um = ui if ui < 0.0 else 0.0
        out[i] = area * (rho_owner[i] * up + rho_neighbor[i] * um)
    return out_arr


def temp_face_flux(double[::1] theta_owner, double[::1] theta_neighbor,
                   double[::1] p_owner, double[::1] u, double c,
                   double gamma, double area):
    cdef Py_ssize_t n = u.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double du, ui, v_plus, v_minus
    for i in range(n):
        du = c * _pressure_diff(theta_owner[i], theta_neighbor[i], p_owner[i], gamma)
        ui = u[i]
        v_plus = (ui if ui > 0.0 else 0.0) - (du if du < 0.0 else 0.0)
        v_minus = (ui if ui < 0.0 else 0.0) - (du if du > 0.0 else 0.0)
        out[i] = area * (theta_owner[i] * v_plus + theta_neighbor[i] * v_minus)
    return out_arr


def temp_face_flux_jac(double[::1] theta_owner, double[::1] theta_neighbor,
                       double[::1] p_owner,
                       double[::1] q_owner, double[::1] q_neighbor,
                       double[::1] u, double c, double gamma, double area):
    cdef Py_ssize_t n = u.shape[0]
    flux_arr = np.empty(n, dtype=np.float64)
    down_arr = np.empty(n, dtype=np.float64)
    dnbr_arr = np.empty(n, dtype=np.float64)
    neg_arr = np.empty(n, dtype=np.uint8)
    cdef double[::1] flux = flux_arr
    cdef double[::1] down = down_arr
    cdef double[::1] dnbr = dnbr_arr
    cdef unsigned char[::1] neg = neg_arr
    cdef Py_ssize_t i
    cdef double du, ui, v_plus, v_minus, donor
    for i in range(n):
        du = c * _pressure_diff(theta_owner[i], theta_neighbor[i], p_owner[i], gamma)
        ui = u[i]
        v_plus = (ui if ui > 0.0 else 0.0) - (du if du < 0.0 else 0.0)
        v_minus = (ui if ui < 0.0 else 0.0) - (du if du > 0.0 else 0.0)
        flux[i] = area * (theta_owner[i] * v_plus + theta_neighbor[i] * v_minus)
        if du < 0.0:
            donor = theta_owner[i]
            neg[i] = 1
        else:
            donor = theta_neighbor[i]
            neg[i] = 0
        down[i] = area * (v_plus + donor * (c * q_owner[i]))
        dnbr[i] = area * (v_minus - donor * (c * q_neighbor[i]))
    return flux_arr, down_arr, dnbr_arr, neg_arr


def upwind_select(double[::1] flux, double[::1] val_minus_side,
                  double[::1] val_plus_side):
    cdef Py_ssize_t n = flux.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double f
    for i in range(n):
        f = flux[i]
        if f > 0.0:
            out[i] = val_minus_side[i]
        elif f < 0.0:
            out[i] = val_plus_side[i]
        else:
            out[i] = 0.5 * (val_minus_side[i] + val_plus_side[i])
    return out_arr
