"""Run orchestration, sweeps, and on-disk artifacts.

Artifacts of one run live in a single directory: numbered snapshot CSVs for
cell fields and raw face velocities, a JSON-lines diagnostics stream (one
record per step), and a manifest echoing the configuration with a
provenance hash.  All output is deterministic for a fixed configuration.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .cases import CaseSpec, get_case
from .config import RunConfig
from .diagnostics import DiagnosticsRecord, cell_velocity, mach_field, make_record, lgamma_norm
from .errors import ConfigurationError, SolverError
from .fields import State, init_state
from .limit import PressureSolver, init_limit_state, limit_step
from .mesh import Mesh, build_uniform_mesh
from .reference import run_reference
from .stepper import StepWorkspace, _face_dt_bound, step

SCHEMA_VERSION = 1
OUT_ROOT_ENV = "ALLMACH_OUT_ROOT"

FIELD_COLUMNS_1D = ("x", "rho", "u", "theta", "rho_theta")
FIELD_COLUMNS_2D = ("x", "y", "rho", "u_center", "v_center", "theta", "mach")
FACE_COLUMNS_1D = ("x", "u")
FACE_COLUMNS_2D = ("dir", "x", "y", "u")


def output_root() -> Path:
    return Path(os.environ.get(OUT_ROOT_ENV, "runs"))


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log10(y) against log10(x), closed form.

    Plain left-to-right float accumulation; mirrored verbatim by downstream
    plotting tools so annotated slopes agree bit-for-bit.
    """
    n = float(len(xs))
    sx = 0.0
    sy = 0.0
    sxx = 0.0
    sxy = 0.0
    for x, y in zip(xs, ys):
        lx = math.log10(x)
        ly = math.log10(y)
        sx += lx
        sy += ly
        sxx += lx * lx
        sxy += lx * ly
    return (n * sxy - sx * sy) / (n * sxx - sx * sx)


def _resolve(cfg: RunConfig):
    case = get_case(cfg.case)
    counts = list(case.counts)
    if cfg.nx is not None:
        counts[0] = cfg.nx
    if cfg.ny is not None:
        if case.dim < 2:
            raise ConfigurationError("ny given for a 1D case")
        counts[1] = cfg.ny
    mesh = build_uniform_mesh(case.extents, tuple(counts))
    eps = cfg.eps if cfg.eps is not None else case.eps_default
    gamma = cfg.gamma if cfg.gamma is not None else case.gamma
    t_end = cfg.t_end if cfg.t_end is not None else case.t_end
    snaps = cfg.snapshot_times if cfg.snapshot_times is not None else case.snapshot_times
    snaps = tuple(t for t in snaps if 0.0 < t <= t_end + 1e-12)
    return case, mesh, eps, gamma, t_end, snaps


@dataclass
class EffectiveParams:
    """Resolved per-run parameters handed to the stepper."""

    gamma: float
    eps: float
    beta: float
    eta: float | None
    eta_floor: float
    dt_max: float | None
    newton_tol: float | None
    newton_max_iter: int


def _params(cfg: RunConfig, gamma: float, eps: float) -> EffectiveParams:
    return EffectiveParams(gamma=gamma, eps=eps, beta=cfg.beta, eta=cfg.eta,
                           eta_floor=cfg.eta_floor, dt_max=cfg.dt_max,
                           newton_tol=cfg.newton_tol,
                           newton_max_iter=cfg.newton_max_iter)


def simulate(mesh: Mesh, case: CaseSpec, params: EffectiveParams, t_end: float,
             snapshot_times=(), on_step=None):
    """Advance a case to t_end; returns (records, snapshots, final state).

    Snapshots include the initial state.  Steps are capped so output times
    and the end time are hit exactly.
    """
    state = init_state(mesh, case, params.eps)
    workspace = StepWorkspace(mesh)
    records = [make_record(mesh, state, params.eps, params.gamma)]
    snapshots = [(0.0, state)]
    targets = sorted({round(t, 15) for t in (*snapshot_times, t_end) if t > 1e-14})
    for target in targets:
        while state.time < target - 1e-12:
            state, report = step(mesh, state, params,
                                 dt_cap=target - state.time, workspace=workspace)
            rec = make_record(mesh, state, params.eps, params.gamma,
                              dt=report.dt, eta=report.eta,
                              newton_iterations=report.newton_iterations)
            records.append(rec)
            if on_step is not None:
                on_step(state, report, rec)
        snapshots.append((target, state))
    return records, snapshots, state


def _format_csv(path: Path, columns, arrays):
    data = np.column_stack(arrays)
    np.savetxt(path, data, delimiter=",", comments="",
               header=",".join(columns), fmt="%.17g")


def write_snapshot(out: Path, index: int, mesh: Mesh, state: State,
                   eps: float, gamma: float):
    """Write the cell-field CSV and the raw face-velocity CSV of one snapshot."""
    fields_name = f"fields_{index:04d}.csv"
    faces_name = f"faces_{index:04d}.csv"
    uc = cell_velocity(mesh, state)
    if mesh.dim == 1:
        (x,) = mesh.cell_centers()
        _format_csv(out / fields_name, FIELD_COLUMNS_1D,
                    (x, state.rho, uc[0], state.theta, state.theta_total))
        (xf,) = mesh.face_centers(0)
        _format_csv(out / faces_name, FACE_COLUMNS_1D, (xf, state.u[0]))
    else:
        x, y = mesh.cell_centers()
        mach = mach_field(mesh, state, eps, gamma)
        _format_csv(out / fields_name, FIELD_COLUMNS_2D,
                    (x, y, state.rho, uc[0], uc[1], state.theta, mach))
        dirs = []
        coords_x = []
        coords_y = []
        vals = []
        for d in range(mesh.dim):
            fx, fy = mesh.face_centers(d)
            dirs.append(np.full(mesh.n_faces[d], float(d)))
            coords_x.append(fx)
            coords_y.append(fy)
            vals.append(state.u[d])
        _format_csv(out / faces_name, FACE_COLUMNS_2D,
                    (np.concatenate(dirs), np.concatenate(coords_x),
                     np.concatenate(coords_y), np.concatenate(vals)))
    return fields_name, faces_name


def _provenance(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class RunResult:
    out_dir: Path | None
    status: str
    records: list
    snapshots: list
    final_state: State | None
    mesh: Mesh
    case: CaseSpec
    eps: float
    gamma: float
    manifest: dict


def run_case(cfg: RunConfig) -> RunResult:
    """Run one configuration and write its artifacts.

    Solver failures still produce a manifest (status "failed") holding the
    last valid snapshot before the exception is re-raised.
    """
    cfg.validate()
    case, mesh, eps, gamma, t_end, snaps = _resolve(cfg)
    params = _params(cfg, gamma, eps)

    out = Path(cfg.out_dir) if cfg.out_dir is not None else (
        output_root() / f"{case.name}_eps{eps:g}_n{'x'.join(str(c) for c in mesh.counts)}")
    out.mkdir(parents=True, exist_ok=True)

    config_echo = dataclasses.asdict(cfg)
    config_echo["snapshot_times"] = list(snaps)
    config_echo.update({"resolved_eps": eps, "resolved_gamma": gamma,
                        "resolved_t_end": t_end, "counts": list(mesh.counts)})
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "case": case.name,
        "dim": mesh.dim,
        "config": config_echo,
        "provenance": _provenance(config_echo),
        "field_columns": list(FIELD_COLUMNS_1D if mesh.dim == 1 else FIELD_COLUMNS_2D),
        "face_columns": list(FACE_COLUMNS_1D if mesh.dim == 1 else FACE_COLUMNS_2D),
        "snapshots": [],
        "status": "dry-run" if cfg.dry_run else "running",
    }
    if cfg.dry_run:
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
        return RunResult(out, "dry-run", [], [], None, mesh, case, eps, gamma, manifest)

    diag_path = out / "diagnostics.jsonl"
    snap_entries = []
    records = []
    status = "ok"
    failure_message = None
    final_state = None
    snapshots = []
    try:
        with open(diag_path, "w", encoding="utf-8") as diag:
            def writer(rec: DiagnosticsRecord):
                diag.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")

            state = init_state(mesh, case, eps)
            workspace = StepWorkspace(mesh)
            rec0 = make_record(mesh, state, eps, gamma)
            records.append(rec0)
            writer(rec0)
            fields_name, faces_name = write_snapshot(out, 0, mesh, state, eps, gamma)
            snap_entries.append({"index": 0, "time": 0.0,
                                 "fields": fields_name, "faces": faces_name})
            snapshots.append((0.0, state))

            targets = sorted({round(t, 15) for t in (*snaps, t_end) if t > 1e-14})
            for target in targets:
                while state.time < target - 1e-12:
                    state, report = step(mesh, state, params,
                                         dt_cap=target - state.time,
                                         workspace=workspace)
                    rec = make_record(mesh, state, eps, gamma, dt=report.dt,
                                      eta=report.eta,
                                      newton_iterations=report.newton_iterations)
                    records.append(rec)
                    writer(rec)
                index = len(snap_entries)
                fields_name, faces_name = write_snapshot(out, index, mesh, state, eps, gamma)
                snap_entries.append({"index": index, "time": target,
                                     "fields": fields_name, "faces": faces_name})
                snapshots.append((target, state))
            final_state = state
    except SolverError as exc:
        status = "failed"
        failure_message = str(exc)

    manifest["status"] = status
    manifest["snapshots"] = snap_entries
    manifest["diagnostics"] = diag_path.name
    manifest["n_steps"] = records[-1].step if records else 0
    manifest["final_time"] = records[-1].time if records else 0.0
    if failure_message is not None:
        manifest["failure"] = failure_message
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))

    result = RunResult(out, status, records, snapshots, final_state,
                       mesh, case, eps, gamma, manifest)
    if status == "failed":
        raise SolverError(f"run failed ({failure_message}); artifacts in {out}")
    return result


# ---------------------------------------------------------------------------
# sweeps


def state_errors(mesh: Mesh, state: State, case: CaseSpec, eps: float) -> dict:
    """Discrete L1 errors of a state against the case's sampled initial data."""
    centers = mesh.cell_centers()
    vol = mesh.cell_volume
    rho_exact = np.broadcast_to(np.asarray(case.rho0(*centers, eps), dtype=float),
                                (mesh.n_cells,))
    theta_exact = np.broadcast_to(np.asarray(case.theta0(*centers, eps), dtype=float),
                                  (mesh.n_cells,))
    errors = {
        "rho": float(np.sum(vol * np.abs(state.rho - rho_exact))),
        "theta": float(np.sum(vol * np.abs(state.theta - theta_exact))),
    }
    names = ("u", "v")
    for d in range(mesh.dim):
        fc = mesh.face_centers(d)
        exact = np.broadcast_to(np.asarray(case.u0[d](*fc, eps), dtype=float),
                                (mesh.n_faces[d],))
        errors[names[d]] = float(np.sum(mesh.dual_volume[d] * np.abs(state.u[d] - exact)))
    return errors


@dataclass
class EocTable:
    """Rows of (eps, N, per-variable L1 error, per-variable EOC)."""

    variables: tuple
    rows: list

    def to_json(self) -> dict:
        return {"variables": list(self.variables), "rows": self.rows}

    def write(self, out_dir: Path):
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "eoc.json").write_text(json.dumps(self.to_json(), indent=2))
        lines = ["eps,n," + ",".join(
            f"err_{v},eoc_{v}" for v in self.variables)]
        for row in self.rows:
            cells = [f"{row['eps']:g}", str(row["n"])]
            for v in self.variables:
                cells.append(f"{row['errors'][v]:.17g}")
                eoc = row["eoc"].get(v) if row["eoc"] else None
                cells.append("" if eoc is None else f"{eoc:.6f}")
            lines.append(",".join(cells))
        (out_dir / "eoc.csv").write_text("\n".join(lines) + "\n")


def sweep_eoc(case_name: str, eps_list=None, n_list=(50, 100, 200, 400),
              base_cfg: RunConfig | None = None, collect=None) -> EocTable:
    """Self-convergence table against the stationary exact solution.

    ``collect``, when given, receives (eps, n, records, final_state, mesh)
    after each run so callers can reuse the runs for other diagnostics.
    """
    case = get_case(case_name)
    if not case.stationary:
        raise ConfigurationError(
            f"case {case_name} has no stationary exact solution for an EOC sweep")
    eps_list = tuple(eps_list) if eps_list is not None else case.eps_list
    cfg = base_cfg if base_cfg is not None else RunConfig(case=case_name)
    t_end = cfg.t_end if cfg.t_end is not None else case.t_end
    gamma = cfg.gamma if cfg.gamma is not None else case.gamma
    variables = ("rho", "u", "v", "theta") if case.dim == 2 else ("rho", "u", "theta")
    rows = []
    for eps in eps_list:
        prev_errors = None
        for n in n_list:
            counts = tuple([n] * case.dim)
            mesh = build_uniform_mesh(case.extents, counts)
            params = _params(cfg, gamma, eps)
            records, _, final_state = simulate(mesh, case, params, t_end)
            errors = state_errors(mesh, final_state, case, eps)
            eoc = None
            if prev_errors is not None:
                eoc = {v: math.log(prev_errors[v] / errors[v]) / math.log(2.0)
                       if errors[v] > 0 and prev_errors[v] > 0 else None
                       for v in variables}
            rows.append({"eps": eps, "n": n, "errors": errors, "eoc": eoc})
            prev_errors = errors
            if collect is not None:
                collect(eps, n, records, final_state, mesh)
    return EocTable(variables=variables, rows=rows)


def decay_summary(runs: dict) -> dict:
    """Sup-in-time deviation norms per eps plus the fitted log-log slope.

    ``runs`` maps eps -> list of DiagnosticsRecord.
    """
    eps_sorted = sorted(runs, reverse=True)
    sups = [max(rec.lgamma_dev for rec in runs[eps]) for eps in eps_sorted]
    return {
        "eps": list(eps_sorted),
        "sup_dev": sups,
        "slope": loglog_slope(eps_sorted, sups),
    }


def write_decay(out_dir: Path, summary: dict, series: dict | None = None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if series:
        files = []
        for i, (eps, recs) in enumerate(sorted(series.items(), reverse=True)):
            name = f"decay_{i:02d}.csv"
            times = np.array([r.time for r in recs])
            devs = np.array([r.lgamma_dev for r in recs])
            _format_csv(out_dir / name, ("time", "dev"), (times, devs))
            files.append({"eps": eps, "file": name})
        summary = dict(summary, series=files)
    (out_dir / "decay.json").write_text(json.dumps(summary, indent=2))


def compare_limit(case_name: str, eps_list=None, counts=None,
                  t_end: float | None = None, base_cfg: RunConfig | None = None,
                  collect=None) -> list:
    """Lockstep error of compressible runs against the limit scheme.

    Both solvers advance with the shared admissible time step, so the
    sup-in-time and integral-in-time norms compare states at identical
    times.  theta of the limit solution is 1/rho.
    """
    case = get_case(case_name)
    eps_list = tuple(eps_list) if eps_list is not None else case.eps_list
    counts = tuple(counts) if counts is not None else case.counts
    t_end = t_end if t_end is not None else case.t_end
    cfg = base_cfg if base_cfg is not None else RunConfig(case=case_name)
    mesh = build_uniform_mesh(case.extents, counts)
    dt_default = min(mesh.spacing) if cfg.dt_max is None else cfg.dt_max
    rows = []
    for eps in eps_list:
        params = _params(cfg, case.gamma, eps)
        state = init_state(mesh, case, eps)
        ls = init_limit_state(mesh, case, eps)
        workspace = StepWorkspace(mesh)
        pressure_solver = PressureSolver(mesh)
        sup_rho = lgamma_norm(mesh, state.rho - ls.rho, case.gamma)
        sup_theta = lgamma_norm(mesh, state.theta - 1.0 / ls.rho, case.gamma)
        int_u = 0.0
        comp_records = [make_record(mesh, state, eps, case.gamma)]
        while state.time < t_end - 1e-12:
            bound_c = _face_dt_bound(mesh, state.rho, state.u, cfg.beta)
            bound_l = _face_dt_bound(mesh, ls.rho, ls.U, cfg.beta)
            dt = min(bound_c, bound_l, dt_default, t_end - state.time)
            state, report = step(mesh, state, params, dt_cap=dt, workspace=workspace)
            ls, _ = limit_step(mesh, ls, params, solver=pressure_solver, dt=dt)
            comp_records.append(make_record(mesh, state, eps, case.gamma,
                                            dt=report.dt, eta=report.eta,
                                            newton_iterations=report.newton_iterations))
            sup_rho = max(sup_rho, lgamma_norm(mesh, state.rho - ls.rho, case.gamma))
            sup_theta = max(sup_theta, lgamma_norm(mesh, state.theta - 1.0 / ls.rho,
                                                   case.gamma))
            l2_sq = 0.0
            for d in range(mesh.dim):
                l2_sq += float(np.sum(mesh.dual_volume[d] * (state.u[d] - ls.U[d]) ** 2))
            int_u += dt * l2_sq
        rows.append({"eps": eps, "err_rho": sup_rho, "err_u": math.sqrt(int_u),
                     "err_theta": sup_theta, "n_steps": state.step_index})
        if collect is not None:
            collect(eps, comp_records, state, ls, mesh)
    return rows


def write_limit_compare(out_dir: Path, rows: list):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "limit_compare.json").write_text(json.dumps(rows, indent=2))


def write_reference(out_dir: Path, case_name: str, n_cells: int,
                    t_end: float | None = None, cfl: float = 0.45,
                    eps: float = 1.0):
    """Run the Rusanov reference solver and store its final profile."""
    case = get_case(case_name)
    t_end = t_end if t_end is not None else case.t_end
    x, final = run_reference(case, n_cells, t_end, cfl=cfl, eps=eps)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"reference_{case_name}_n{n_cells}.csv"
    _format_csv(path, ("x", "rho", "momentum", "theta", "rho_theta"),
                (x, final.rho, final.momentum, final.theta, final.rho_theta))
    return path
