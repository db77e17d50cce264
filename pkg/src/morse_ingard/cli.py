"""Command-line driver: ``morse-ingard {solve,eig,convergence,bench,check}``.

Exit codes: 0 success, 1 solver or check failure, 2 bad input.
"""
from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import numpy as np

from . import spectral, studies
from .assembly import Formulation, assemble, assemble_blocks
from .krylov import ApproxGmres, ExactLU, PcKind, PrecondSpec, solve_system
from .mesh import AIR, TAGS, ForkGeometry, MeshError, fork_domain, mesh_stats, read_gmsh, refine, unit_square
from .params import REGIMES, derive

PC_NAMES = {"none": PcKind.NONE, "jacobi": PcKind.JACOBI, "gs": PcKind.GAUSS_SEIDEL}


def _parse_tag_map(text):
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, _, tag = item.partition("=")
        if tag not in TAGS:
            raise click.BadParameter(f"tag must be one of {TAGS}, got {tag!r}", param_hint="--tag-map")
        out[int(key)] = tag
    return out


def mesh_options(f):
    opts = [
        click.option("--regime", type=click.Choice(sorted(REGIMES)), default="QEPAS", show_default=True),
        click.option("--formulation", type=click.Choice([x.value for x in Formulation]),
                     default=Formulation.REFORMULATED.value, show_default=True),
        click.option("--mesh", "mesh_kind", type=click.Choice(["fork", "square", "gmsh"]), default="fork",
                     show_default=True),
        click.option("--h", type=float, default=0.25, show_default=True, help="Fork grid spacing."),
        click.option("--n", type=int, default=8, show_default=True, help="Unit-square cells per side."),
        click.option("--square-tag", type=click.Choice(TAGS), default=AIR, show_default=True),
        click.option("--gmsh", "gmsh_path", type=click.Path(exists=True, dir_okay=False), default=None),
        click.option("--tag-map", default="1=Air,2=Wall", show_default=True,
                     help="Physical id to boundary tag for --mesh gmsh."),
        click.option("--refinements", type=click.IntRange(min=0), default=0, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def solver_options(f):
    opts = [
        click.option("--pc", type=click.Choice(sorted(PC_NAMES)), default="gs", show_default=True),
        click.option("--inner", type=click.Choice(["lu", "gmres"]), default="lu", show_default=True),
        click.option("--sweeps", type=click.IntRange(min=1), default=10, show_default=True),
        click.option("--smoother", type=click.Choice(["SSOR", "Diagonal"]), default="SSOR", show_default=True),
        click.option("--rtol", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=1e-8,
                     show_default=True),
        click.option("--restart", type=click.IntRange(min=1), default=30, show_default=True),
        click.option("--maxit", type=click.IntRange(min=1), default=2000, show_default=True),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _inner(inner, sweeps, smoother):
    return ExactLU() if inner == "lu" else ApproxGmres(sweeps, smoother)


def _base_mesh(mesh_kind, h, n, square_tag, gmsh_path, tag_map):
    if mesh_kind == "fork":
        return fork_domain(ForkGeometry(), h)
    if mesh_kind == "square":
        return unit_square(n, square_tag)
    if gmsh_path is None:
        raise click.BadParameter("--gmsh PATH is required with --mesh gmsh")
    return read_gmsh(Path(gmsh_path).read_text(), _parse_tag_map(tag_map))


def _meshes(kw, levels=None):
    m = _base_mesh(kw["mesh_kind"], kw["h"], kw["n"], kw["square_tag"], kw["gmsh_path"], kw["tag_map"])
    out = [m]
    for _ in range(kw["refinements"] if levels is None else levels):
        m = refine(m)
        out.append(m)
    return out


def _bad_input_guard(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (MeshError, ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


@click.group()
def main():
    """Finite elements and block preconditioners for the Morse-Ingard equations."""


@main.command()
@mesh_options
@solver_options
@click.option("--amplitude", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="solution.csv", show_default=True)
@click.option("--compare/--no-compare", default=False, help="Report distance to the other formulation.")
@_bad_input_guard
def solve(pc, inner, sweeps, smoother, rtol, restart, maxit, amplitude, out, compare, **kw):
    """Solve with a Gaussian source between the tines; write x,y,absT,absP."""
    d = derive(REGIMES[kw["regime"]]())
    m = _meshes(kw)[-1]
    form = Formulation(kw["formulation"])
    source = studies.default_source(ForkGeometry(), amplitude)
    b = assemble(m, d, form, source)
    T, P, rep = solve_system(b, PrecondSpec(PC_NAMES[pc], _inner(inner, sweeps, smoother)), rtol, restart, maxit)
    studies.write_solution_csv(out, m, T, P)
    click.echo(f"{kw['regime']} {form.value} pc={pc}/{inner} vertices={m.num_vertices} " + rep.summary())
    if compare:
        other = Formulation.ORIGINAL if form == Formulation.REFORMULATED else Formulation.REFORMULATED
        T2, P2 = studies.direct_solve(assemble(m, d, other, source))
        click.echo(f"relative L2 difference vs {other.value}: "
                   f"T {studies.relative_l2(m, T, T2):.4e}  P {studies.relative_l2(m, P, P2):.4e}")
    sys.exit(0 if rep.converged else 1)


@main.command()
@mesh_options
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--raw/--mass-geometry", default=False, help="Unpreconditioned spectrum of A itself.")
@_bad_input_guard
def eig(out, raw, **kw):
    """Write unpreconditioned, Jacobi and Gauss-Seidel spectra as Real,Imag CSVs."""
    d = derive(REGIMES[kw["regime"]]())
    m = _meshes(kw)[-1]
    if 2 * m.num_vertices > spectral.EIG_LIMIT:
        click.echo(f"error: {2 * m.num_vertices} unknowns exceed the dense limit {spectral.EIG_LIMIT}; "
                   "use a coarser mesh", err=True)
        sys.exit(2)
    b = assemble_blocks(m, d, Formulation(kw["formulation"]))
    tag = f"{kw['regime']}.2d.{m.num_triangles}"
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    u = spectral.unpreconditioned_spectrum(b, raw=raw)
    rj = spectral.check_jacobi_identity(b)
    rg = spectral.check_gs_identity(b)
    for name, rep in (("nopc", u), ("jac", rj), ("gs", rg)):
        spectral.write_spectrum_csv(outdir / f"{name}.eig.{tag}.csv", rep.eigenvalues)
    click.echo(f"n={b.n} unpreconditioned min|lambda|={u.info['min_abs']:.4e}")
    click.echo(f"Jacobi: max_match_error={rj.max_match_error:.3e} max|lambda-1|={rj.info['max_dist_to_one']:.4f} "
               f"sqrt(max|mu|)={rj.info['ball_radius']:.4f}")
    click.echo(f"GaussSeidel: max_match_error={rg.max_match_error:.3e} unit eigenvalues={rg.info['unit_count']} "
               f"max|mu|={rg.info['max_abs_mu']:.4f}")
    ok = rj.passed and rg.passed and max(rj.max_match_error, rg.max_match_error) <= 1e-7
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--regime", type=click.Choice(sorted(REGIMES)), default="QEPAS", show_default=True)
@click.option("--formulation", type=click.Choice([x.value for x in Formulation]),
              default=Formulation.REFORMULATED.value, show_default=True)
@click.option("--sizes", default="8,16,32,64", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@_bad_input_guard
def convergence(regime, formulation, sizes, out):
    """Manufactured-solution error table on the all-Wall unit square."""
    d = derive(REGIMES[regime]())
    rows = studies.convergence_study(d, [int(s) for s in sizes.split(",")], Formulation(formulation))
    lines = ["n,h,err_L2,err_H1,rate_L2,rate_H1"]
    for r in rows:
        lines.append(f"{r.n},{r.h:.6g},{r.err_l2:.6e},{r.err_h1:.6e},{r.rate_l2:.4f},{r.rate_h1:.4f}")
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    click.echo(text, nl=False)


@main.command()
@mesh_options
@click.option("--pc", "pcs", type=click.Choice(["jacobi", "gs"]), multiple=True, default=("gs", "jacobi"),
              show_default=True)
@click.option("--inner", "inners", type=click.Choice(["lu", "gmres"]), multiple=True, default=("lu",),
              show_default=True)
@click.option("--sweeps", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--smoother", type=click.Choice(["SSOR", "Diagonal"]), default="SSOR", show_default=True)
@click.option("--rtol", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=1e-8, show_default=True)
@click.option("--restart", type=click.IntRange(min=1), default=30, show_default=True)
@click.option("--maxit", type=click.IntRange(min=1), default=2000, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@_bad_input_guard
def bench(pcs, inners, sweeps, smoother, rtol, restart, maxit, out, **kw):
    """Iterations and solver time under uniform refinement; one N,Its,Time CSV per variant."""
    if kw["refinements"] < 3:
        raise click.BadParameter("bench needs --refinements >= 3", param_hint="--refinements")
    d = derive(REGIMES[kw["regime"]]())
    specs = [PrecondSpec(PC_NAMES[p], _inner(i, sweeps, smoother)) for p in pcs for i in inners]
    form = Formulation(kw["formulation"])
    res = studies.bench(_meshes(kw), d, specs, form, rtol=rtol, restart=restart, maxit=maxit)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    for label, rows in res.items():
        studies.write_bench_csv(outdir / f"pc.{form.value}.{label}.csv", rows)
        click.echo(f"[{label}]")
        for r in rows:
            click.echo(f"  N={r.N:7d}  Its={r.Its:4d}  Time={r.Time:9.4f}s  Time/N={r.TimePerVertex:.3e}")


@main.command()
@mesh_options
@_bad_input_guard
def check(**kw):
    """Block identities, row-equivalence, Garding sweep and spectral identities."""
    d = derive(REGIMES[kw["regime"]]())
    m = _meshes(kw)[-1]
    nv, nt, hmax = mesh_stats(m)
    click.echo(f"mesh: {nv} vertices, {nt} triangles, h_max={hmax:.4g}")
    results = studies.run_checks(m, d, Formulation(kw["formulation"]), seed=kw["seed"])
    ok = True
    for name, passed, detail in results:
        flag = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        ok &= passed is not False
        click.echo(f"{flag:4s}  {name}: {detail}")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
