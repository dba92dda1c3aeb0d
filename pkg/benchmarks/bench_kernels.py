#!/usr/bin/env python3
"""Compare the compiled kernel backend against the numpy fallback.

Times the per-face hot kernels on benchmark-sized face arrays and one full
implicit solve driven through each backend (selected via ALLMACH_PURE for a
subprocess-free comparison we monkeypatch the kernel module directly).

Run:  python benchmarks/bench_kernels.py [n_faces]
"""

import sys
import time

import numpy as np

from allmach.kernels import _numpy

try:
    from allmach.kernels import _compiled
except ImportError:
    _compiled = None


def bench(fn, *args, repeats=20):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 400 * 400
    rng = np.random.default_rng(7)
    theta_k = rng.uniform(0.5, 1.5, n)
    theta_l = rng.uniform(0.5, 1.5, n)
    u = rng.standard_normal(n)
    c, area = 25.0, 0.0025

    header = f"{'kernel':28s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}"
    print(f"kernel timings on {n} faces (ms per call)")
    print(header)
    print("-" * len(header))
    for gamma in (1.4, 2.0):
        p_k = theta_k ** gamma
        q_k = gamma * theta_k ** (gamma - 1.0)
        q_l = gamma * theta_l ** (gamma - 1.0)
        cases = [
            (f"pressure_diff (g={gamma})",
             lambda m: m.pressure_diff(theta_k, theta_l, p_k, gamma)),
            (f"temp_face_flux (g={gamma})",
             lambda m: m.temp_face_flux(theta_k, theta_l, p_k, u, c, gamma, area)),
            (f"temp_face_flux_jac (g={gamma})",
             lambda m: m.temp_face_flux_jac(theta_k, theta_l, p_k, q_k, q_l,
                                            u, c, gamma, area)),
        ]
        if gamma == 1.4:
            cases.insert(0, ("mass_face_flux",
                             lambda m: m.mass_face_flux(theta_k, theta_l, u, area)))
            cases.append(("upwind_select",
                          lambda m: m.upwind_select(u, theta_k, theta_l)))
        for name, runner in cases:
            t_np = bench(runner, _numpy) * 1e3
            if _compiled is None:
                print(f"{name:28s} {t_np:10.3f} {'n/a':>10s} {'n/a':>8s}")
                continue
            t_cy = bench(runner, _compiled) * 1e3
            print(f"{name:28s} {t_np:10.3f} {t_cy:10.3f} {t_np / t_cy:7.2f}x")

    # one implicit solve through each backend
    import allmach.kernels as kernel_mod
    from allmach.cases import get_case
    from allmach.fields import init_state
    from allmach.mesh import build_uniform_mesh
    from allmach.stepper import StepWorkspace, solve_theta_implicit

    side = max(int(np.sqrt(n)), 16)
    case = get_case("stationary-vortex")
    mesh = build_uniform_mesh(case.extents, (side, side))
    state = init_state(mesh, case, 1e-2)
    ws = StepWorkspace(mesh)

    def one_solve():
        solve_theta_implicit(mesh, state, state.rho, dt=0.5 / side, eta=3.0,
                             eps=1e-2, gamma=case.gamma, workspace=ws)

    backends = [("numpy", _numpy)] + ([("compiled", _compiled)] if _compiled else [])
    print(f"\nfull implicit solve on a {side}x{side} grid (ms per solve)")
    saved = (kernel_mod.mass_face_flux, kernel_mod.pressure_diff,
             kernel_mod.temp_face_flux, kernel_mod.temp_face_flux_jac,
             kernel_mod.upwind_select)
    try:
        for name, impl in backends:
            kernel_mod.mass_face_flux = impl.mass_face_flux
            kernel_mod.pressure_diff = impl.pressure_diff
            kernel_mod.temp_face_flux = impl.temp_face_flux
            kernel_mod.temp_face_flux_jac = impl.temp_face_flux_jac
            kernel_mod.upwind_select = impl.upwind_select
            print(f"{name:22s} {bench(one_solve, repeats=3) * 1e3:10.1f}")
    finally:
        (kernel_mod.mass_face_flux, kernel_mod.pressure_diff,
         kernel_mod.temp_face_flux, kernel_mod.temp_face_flux_jac,
         kernel_mod.upwind_select) = saved


if __name__ == "__main__":
    main()
