"""Command-line interface: run cases, sweeps, comparisons, references.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import RunConfig, load_config
from .errors import ConfigurationError, SolverError
from .runner import (EocTable, compare_limit, output_root, run_case,
                     sweep_eoc, write_limit_compare, write_reference)

EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _floats(text: str):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _guarded(fn):
    try:
        fn()
    except ConfigurationError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except SolverError as exc:
        click.echo(f"solver failure: {exc}", err=True)
        sys.exit(EXIT_SOLVER)


@click.group()
def main():
    """Semi-implicit all-speed solver for Euler flow with temperature transport."""


@main.command()
@click.argument("case")
@click.option("--eps", type=float, default=None, help="Mach-number parameter.")
@click.option("--nx", type=int, default=None)
@click.option("--ny", type=int, default=None)
@click.option("--t-end", type=float, default=None)
@click.option("--beta", type=float, default=0.5, help="CFL fraction in (0, 1/2].")
@click.option("--eta", default="auto", help="Stabilization parameter or 'auto'.")
@click.option("--snapshots", default=None, help="Comma-separated output times.")
@click.option("--dt-max", type=float, default=None)
@click.option("--newton-tol", type=float, default=None)
@click.option("--newton-max-iter", type=int, default=50)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Flat key = value config file; explicit flags win.")
@click.option("--out", type=click.Path(), default=None, help="Output directory.")
@click.option("--dry-run", is_flag=True, help="Write the manifest only.")
def run(case, eps, nx, ny, t_end, beta, eta, snapshots, dt_max,
        newton_tol, newton_max_iter, config_path, out, dry_run):
    """Run one benchmark case and write snapshot/diagnostic artifacts."""

    def body():
        overrides = {
            "case": case,
            "eps": eps,
            "nx": nx,
            "ny": ny,
            "t_end": t_end,
            "beta": beta,
            "eta": None if str(eta).lower() == "auto" else float(eta),
            "snapshot_times": _floats(snapshots) if snapshots else None,
            "dt_max": dt_max,
            "newton_tol": newton_tol,
            "newton_max_iter": newton_max_iter,
            "out_dir": out,
            "dry_run": dry_run or None,
        }
        if config_path:
            cfg = load_config(config_path, overrides)
        else:
            cfg = RunConfig(**{k: v for k, v in overrides.items() if v is not None})
            cfg.validate()
        result = run_case(cfg)
        click.echo(f"wrote {result.out_dir} ({len(result.records) - 1} steps)")

    _guarded(body)


@main.command("sweep-eoc")
@click.argument("case")
@click.option("--eps-list", default=None, help="Comma-separated eps values.")
@click.option("--n-list", default="50,100,200,400", help="Comma-separated grid sizes.")
@click.option("--out", type=click.Path(), default=None)
def sweep_eoc_cmd(case, eps_list, n_list, out):
    """Mesh-refinement error/EOC table against the stationary solution."""

    def body():
        table: EocTable = sweep_eoc(case, _floats(eps_list) if eps_list else None,
                                    _ints(n_list))
        out_dir = Path(out) if out else output_root() / f"{case}_eoc"
        table.write(out_dir)
        for row in table.rows:
            eocs = row["eoc"] or {}
            cells = " ".join(
                f"{v}={row['errors'][v]:.6e}({eocs.get(v) or float('nan'):.2f})"
                for v in table.variables)
            click.echo(f"eps={row['eps']:g} N={row['n']:4d} {cells}")
        click.echo(f"wrote {out_dir}")

    _guarded(body)


@main.command("compare-limit")
@click.argument("case")
@click.option("--eps-list", default=None, help="Comma-separated eps values.")
@click.option("--n", type=int, default=None, help="Cells per axis.")
@click.option("--t-end", type=float, default=None)
@click.option("--out", type=click.Path(), default=None)
def compare_limit_cmd(case, eps_list, n, t_end, out):
    """Error of the compressible solution against the limit scheme."""

    def body():
        from .cases import get_case

        spec = get_case(case)
        counts = tuple([n] * spec.dim) if n else None
        rows = compare_limit(case, _floats(eps_list) if eps_list else None,
                             counts=counts, t_end=t_end)
        out_dir = Path(out) if out else output_root() / f"{case}_limit"
        write_limit_compare(out_dir, rows)
        for row in rows:
            click.echo(f"eps={row['eps']:g} rho={row['err_rho']:.4e} "
                       f"u={row['err_u']:.4e} theta={row['err_theta']:.4e}")
        click.echo(f"wrote {out_dir}")

    _guarded(body)


@main.command("reference")
@click.argument("case")
@click.option("--n", type=int, default=10000, help="Reference grid cells.")
@click.option("--t-end", type=float, default=None)
@click.option("--cfl", type=float, default=0.45)
@click.option("--eps", type=float, default=1.0)
@click.option("--out", type=click.Path(), default=None)
def reference_cmd(case, n, t_end, cfl, eps, out):
    """Explicit Rusanov reference run (1D cases)."""

    def body():
        out_dir = Path(out) if out else output_root() / f"{case}_reference"
        path = write_reference(out_dir, case, n, t_end=t_end, cfl=cfl, eps=eps)
        click.echo(f"wrote {path}")

    _guarded(body)


if __name__ == "__main__":
    main()
