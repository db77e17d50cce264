"""Experiment drivers behind the command-line interface.

Each driver takes plain arguments, returns data and optionally writes CSV
files; none of them print.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import spectral
from .assembly import (
    Formulation,
    assemble,
    assemble_blocks,
    boundary_mass,
    gaussian_source,
    general_rhs,
    mass_matrix,
    monolithic,
    norms,
    row_equivalence,
    stiffness_matrix,
)
from .krylov import BlockPreconditioner, ExactLU, PcKind, PrecondSpec, solve_system
from .mesh import AIR, WALL, ForkGeometry, Mesh, fork_domain, refine, unit_square
from .params import DerivedParams
from .sparse import sparse_lu


# 6-point degree-4 rule on the reference triangle (barycentric, weights sum to 1)
_QA, _QB = 0.445948490915965, 0.091576213509771
_QBARY = np.array([
    [_QA, _QA, 1 - 2 * _QA], [_QA, 1 - 2 * _QA, _QA], [1 - 2 * _QA, _QA, _QA],
    [_QB, _QB, 1 - 2 * _QB], [_QB, 1 - 2 * _QB, _QB], [1 - 2 * _QB, _QB, _QB],
])
_QW = np.array([0.223381589678011] * 3 + [0.109951743655322] * 3)


def fe_errors(m: Mesh, uh, u, grad_u):
    """``(L2, H1)`` norms of ``u - u_h`` by element quadrature.

    ``u(x, y)`` and ``grad_u(x, y) -> (ux, uy)`` are vectorized callables.
    """
    t = m.triangles
    p = m.vertices[t]
    x, y = p[..., 0], p[..., 1]
    area = m.signed_areas()
    bx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1) / (2 * area[:, None])
    by = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1) / (2 * area[:, None])
    vals = uh[t]
    gx = (bx * vals).sum(axis=1)
    gy = (by * vals).sum(axis=1)
    qx = x @ _QBARY.T
    qy = y @ _QBARY.T
    uhq = vals @ _QBARY.T
    e0 = np.abs(u(qx, qy) - uhq) ** 2
    ux, uy = grad_u(qx, qy)
    e1 = np.abs(ux - gx[:, None]) ** 2 + np.abs(uy - gy[:, None]) ** 2
    l2 = float(np.sqrt((area[:, None] * _QW * e0).sum()))
    h1semi2 = float((area[:, None] * _QW * e1).sum())
    return l2, math.sqrt(l2 ** 2 + h1semi2)


def _cos(x, y):
    return np.cos(np.pi * x) * np.cos(np.pi * y)


def _grad_cos(x, y):
    return (-np.pi * np.sin(np.pi * x) * np.cos(np.pi * y),
            -np.pi * np.cos(np.pi * x) * np.sin(np.pi * y))


def manufactured_coefficients(d: DerivedParams, form=Formulation.REFORMULATED):
    """Source multipliers of ``cos(pi x) cos(pi y)`` when ``T = P`` equal that field."""
    g, Lam = d.gamma, d.Lambda
    k2 = 2 * math.pi ** 2
    c1 = k2 * d.scriptM - 1j + 1j * (g - 1) / g
    if Formulation(form) == Formulation.REFORMULATED:
        c2 = d.sigma2 + k2 * (1 - 1j * g * Lam) - d.kappa_tilde
    else:
        c2 = complex(k2)
    return c1, c2


@dataclass
class ConvergenceRow:
    n: int
    h: float
    err_l2: float
    err_h1: float
    interp_l2: float
    interp_h1: float
    rate_l2: float = float("nan")
    rate_h1: float = float("nan")


def convergence_study(d: DerivedParams, sizes=(8, 16, 32, 64), form=Formulation.REFORMULATED, rtol=1e-12):
    """Manufactured ``T = P = cos(pi x) cos(pi y)`` on the all-Wall unit square.

    Errors are measured against the exact solution by quadrature; the
    discrete distance to the nodal interpolant is kept alongside.
    """
    c1, c2 = manufactured_coefficients(d, form)
    rows = []
    for n in sizes:
        m = unit_square(n, WALL)
        b = assemble_blocks(m, d, form)
        F1, F2 = general_rhs(m, lambda x, y: c1 * _cos(x, y), lambda x, y: c2 * _cos(x, y))
        T, P, rep = solve_system(b.with_rhs(F1, F2), PrecondSpec(PcKind.GAUSS_SEIDEL), rtol=rtol)
        if not rep.converged:
            raise RuntimeError(f"manufactured solve diverged at n={n}")
        l2T, h1T = fe_errors(m, T, _cos, _grad_cos)
        l2P, h1P = fe_errors(m, P, _cos, _grad_cos)
        G0, G1 = norms(m)
        ui = _cos(m.vertices[:, 0], m.vertices[:, 1])
        il2 = il1 = 0.0
        for e in (T - ui, P - ui):
            il2 += (np.vdot(e, G0 @ e)).real
            il1 += (np.vdot(e, G1 @ e)).real
        rows.append(ConvergenceRow(n, 1.0 / n, math.hypot(l2T, l2P), math.hypot(h1T, h1P),
                                   math.sqrt(il2), math.sqrt(il1)))
    for prev, cur in zip(rows, rows[1:]):
        r = math.log2(prev.h / cur.h)
        cur.rate_l2 = math.log2(prev.err_l2 / cur.err_l2) / r
        cur.rate_h1 = math.log2(prev.err_h1 / cur.err_h1) / r
    return rows


def default_source(g: ForkGeometry = ForkGeometry(), amplitude=1.0):
    """Gaussian centred in the gap between the tines, width a quarter of the gap."""
    return gaussian_source(g.gap_center(), g.gap_width / 4.0, amplitude)


def fork_levels(g: ForkGeometry, h: float, levels: int):
    """Fork mesh at spacing ``h`` plus ``levels`` uniform refinements."""
    m = fork_domain(g, h)
    out = [m]
    for _ in range(levels):
        m = refine(m)
        out.append(m)
    return out


@dataclass
class BenchRow:
    N: int
    Its: int
    Time: float

    @property
    def TimePerVertex(self) -> float:
        return self.Time / self.N


def bench(meshes, d: DerivedParams, specs, form=Formulation.REFORMULATED, source=None,
          rtol=1e-8, restart=30, maxit=2000):
    """Iteration counts and solver times for each spec on each mesh.

    Returns ``{spec.label: [BenchRow, ...]}``; a failed solve is recorded
    with ``Its = -1``.
    """
    source = default_source() if source is None else source
    out = {s.label: [] for s in specs}
    for m in meshes:
        b = assemble(m, d, form, source)
        for s in specs:
            _, _, rep = solve_system(b, s, rtol, restart, maxit)
            its = rep.iterations if rep.converged else -1
            out[s.label].append(BenchRow(m.num_vertices, its, rep.wall_time))
    return out


def write_bench_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "Its", "Time"])
        for r in rows:
            w.writerow([r.N, r.Its, f"{r.Time:.6f}"])


def write_solution_csv(path, m: Mesh, T, P):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "absT", "absP"])
        for (x, y), t, p in zip(m.vertices, np.abs(T), np.abs(P)):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(t)), repr(float(p))])


def direct_solve(b):
    """Sparse LU solve of the monolithic system; returns ``(T, P)``."""
    A, F = monolithic(b)
    x = sparse_lu(A).solve(F)
    return x[:b.n], x[b.n:]


def relative_l2(m: Mesh, x, y) -> float:
    """``||x - y|| / ||y||`` in the mass-matrix norm."""
    M = mass_matrix(m)
    num = np.vdot(x - y, M @ (x - y)).real
    den = np.vdot(y, M @ y).real
    return math.sqrt(num / den) if den > 0 else math.sqrt(num)


def check_blocks(b, m: Mesh, d: DerivedParams, tol=1e-12):
    """Entrywise identities of the assembled blocks; returns ``{name: (passed, error)}``."""
    M = mass_matrix(m)
    K = stiffness_matrix(m)
    Kg = K - 1j * d.sqrt_gamma * boundary_mass(m, AIR)
    shift = d.kappa_tilde if b.formulation == Formulation.REFORMULATED else d.gamma

    def err(X, Y):
        D = sp.csr_matrix(X - Y)
        scale = max(abs(sp.csr_matrix(Y)).max(), 1e-300)
        return (abs(D).max() if D.nnz else 0.0) / scale

    def asym(X):
        D = sp.csr_matrix(X - X.T)
        return (abs(D).max() if D.nnz else 0.0) / max(abs(X).max(), 1e-300)

    res = {
        "H_T = scriptM K - i M": err(b.H_T, d.scriptM * K - 1j * M),
        "M1 = sigma1 M": err(b.M1, d.sigma1 * M),
        "H_P = (1 - i gamma Lambda) K_gamma - c M": err(b.H_P, (1 - 1j * d.gamma * d.Lambda) * Kg - shift * M),
        "H_T complex symmetric": asym(b.H_T),
        "H_P complex symmetric": asym(b.H_P),
    }
    if b.formulation == Formulation.REFORMULATED:
        res["C2 = sigma2 M"] = err(b.C2, d.sigma2 * M)
    else:
        res["C2 = gamma M + i gamma Lambda K"] = err(b.C2, d.gamma * M + 1j * d.gamma * d.Lambda * K)
    return {k: (v <= tol, v) for k, v in res.items()}


def run_checks(m: Mesh, d: DerivedParams, form=Formulation.REFORMULATED, b=None, seed=0):
    """All assertable diagnostics on a coarse mesh.

    Returns a list of ``(name, passed, detail)``; informational entries
    have ``passed = None``.
    """
    b = assemble_blocks(m, d, form) if b is None else b
    out = []
    for name, (ok, e) in check_blocks(b, m, d).items():
        out.append((name, bool(ok), f"rel err {e:.2e}"))
    eq = row_equivalence(m, d)
    out.append(("row equivalence: temperature row", eq["temperature_row"] <= 1e-12,
                f"{eq['temperature_row']:.2e}"))
    out.append(("row equivalence: Laplacian cancels in coupling", eq["pressure_coupling"] <= 1e-12,
                f"{eq['pressure_coupling']:.2e}"))
    out.append(("row equivalence: no stiffness left in coupling", eq["stiffness_in_coupling"] <= 1e-12,
                f"{eq['stiffness_in_coupling']:.2e}"))
    out.append(("row equivalence: pressure rhs", eq["pressure_rhs"] <= 1e-12, f"{eq['pressure_rhs']:.2e}"))
    c = eq["pressure_mass_residual_coefficient"]
    out.append(("row equivalence: pressure mass residual (reported)", None,
                f"coefficient {c.real:.6g}{c.imag:+.3g}i vs 2*Lambda/scriptM = {2 * d.lambda_over_m:.6g}"))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for kind in (PcKind.JACOBI, PcKind.GAUSS_SEIDEL):
        P = BlockPreconditioner(b, kind, ExactLU())
        r1, r2 = (rng.standard_normal(2 * b.n) + 1j * rng.standard_normal(2 * b.n) for _ in range(2))
        a = complex(rng.standard_normal(), rng.standard_normal())
        lhs, rhs = P(a * r1 + r2), a * P(r1) + P(r2)
        worst = max(worst, float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs)))
    out.append(("preconditioners linear (random probes)", worst <= 1e-12, f"rel err {worst:.2e}"))
    grams = norms(m)
    rows, K = spectral.garding_sweep(b, grams)
    alphas = [a for _, a in rows]
    out.append(("Garding: alpha(K) nondecreasing", bool(np.all(np.diff(alphas) >= -1e-12)),
                ", ".join(f"K={k:g}: {a:.3e}" for k, a in rows)))
    out.append(("Garding: alpha > 0 for some K", K is not None, f"smallest K = {K}"))
    rj = spectral.check_jacobi_identity(b)
    out.append(("Jacobi: lambda = 1 +/- sqrt(mu)", rj.max_match_error <= 1e-7, f"Hausdorff {rj.max_match_error:.2e}"))
    out.append(("Jacobi: no eigenvalue at 1", rj.checks["no_unit_eigenvalue"],
                f"min |lambda-1| {rj.info['min_dist_to_one']:.3e}"))
    rg = spectral.check_gs_identity(b)
    out.append(("GS: unit eigenvalue multiplicity >= n", rg.checks["unit_multiplicity"],
                f"{rg.info['unit_count']} of {2 * b.n}"))
    out.append(("GS: remaining = 1 - mu", rg.max_match_error <= 1e-7, f"Hausdorff {rg.max_match_error:.2e}"))
    out.append(("GS: ball |lambda-1| <= max|mu|", rg.checks["ball"], f"max|mu| {rg.info['max_abs_mu']:.4g}"))
    return out
