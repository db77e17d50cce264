"""P1 Galerkin matrices and the 2x2 block system for temperature and pressure.

Unknowns are ordered temperature first, then pressure. Two formulations are
supported:

``Reformulated``
    The temperature Laplacian is eliminated from the pressure equation, so
    the blocks couple only through scaled mass matrices.
``Original``
    The scaled system before elimination (both rows negated so the
    temperature block is shared with the reformulated system); the
    pressure row couples to temperature through ``gamma M + i gamma Lambda K``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from . import kernels
from .mesh import AIR, Mesh
from .params import DerivedParams
from .sparse import ComplexCSR, as_csr


class Formulation(str, enum.Enum):
    REFORMULATED = "Reformulated"
    ORIGINAL = "Original"


@dataclass(frozen=True)
class BlockSystem:
    H_T: ComplexCSR
    H_P: ComplexCSR
    M1: ComplexCSR
    C2: ComplexCSR
    F1: np.ndarray
    F2: np.ndarray
    formulation: Formulation
    mass: ComplexCSR | None = None

    @property
    def n(self) -> int:
        return self.H_T.shape[0]

    def with_rhs(self, F1, F2) -> "BlockSystem":
        return replace(self, F1=np.asarray(F1, dtype=np.complex128),
                       F2=np.asarray(F2, dtype=np.complex128))


_MASS_REF = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


def _scatter(m: Mesh, local, n=None) -> ComplexCSR:
    t = m.triangles
    n = m.num_vertices if n is None else n
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    return as_csr(sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)))


def mass_matrix(m: Mesh) -> ComplexCSR:
    areas, _ = kernels.p1_local(m.vertices, m.triangles)
    return _scatter(m, areas[:, None, None] * _MASS_REF)


def stiffness_matrix(m: Mesh) -> ComplexCSR:
    _, kloc = kernels.p1_local(m.vertices, m.triangles)
    return _scatter(m, kloc)


def boundary_mass(m: Mesh, tag: str = AIR) -> ComplexCSR:
    """Gram matrix of the hat functions on boundary edges carrying ``tag``."""
    n = m.num_vertices
    e = m.tagged_edges(tag)
    if e.shape[0] == 0:
        return as_csr(sp.csr_matrix((n, n)))
    length = np.linalg.norm(m.vertices[e[:, 0]] - m.vertices[e[:, 1]], axis=1)
    local = length[:, None, None] * (np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0)
    rows = np.repeat(e, 2, axis=1).ravel()
    cols = np.tile(e, (1, 2)).ravel()
    return as_csr(sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)))


def _evaluate(f, x, y):
    if callable(f):
        return np.broadcast_to(np.asarray(f(x, y), dtype=np.complex128), x.shape)
    return np.full(x.shape, complex(f))


def load_vector(m: Mesh, f) -> np.ndarray:
    """``(f, psi_i)`` by the three-point edge-midpoint rule on each triangle.

    ``f`` is a vectorized callable ``f(x, y)`` or a constant.
    """
    t = m.triangles
    p = m.vertices[t]
    areas = m.signed_areas()
    # midpoint k lies on edge (k, k+1)
    mids = 0.5 * (p + np.roll(p, -1, axis=1))
    fm = _evaluate(f, mids[..., 0], mids[..., 1])
    # hat of vertex k is 1/2 on edges (k-1, k) and (k, k+1), zero on the third
    local = (areas[:, None] / 6.0) * (fm + np.roll(fm, 1, axis=1))
    out = np.zeros(m.num_vertices, dtype=np.complex128)
    np.add.at(out, t.ravel(), local.ravel())
    return out


def norms(m: Mesh):
    """Gram matrices of the L2 and H1 inner products on the P1 space."""
    M = mass_matrix(m)
    return M, as_csr(stiffness_matrix(m) + M)


def _blocks(M, K, Ba, d: DerivedParams, form: Formulation):
    g, Lam, sM = d.gamma, d.Lambda, d.scriptM
    Kgam = K - 1j * d.sqrt_gamma * Ba
    H_T = as_csr(sM * K - 1j * M)
    M1 = as_csr(d.sigma1 * M)
    if form == Formulation.REFORMULATED:
        C2 = as_csr(d.sigma2 * M)
        H_P = as_csr((1 - 1j * g * Lam) * Kgam - d.kappa_tilde * M)
    elif form == Formulation.ORIGINAL:
        C2 = as_csr(g * M + 1j * g * Lam * K)
        H_P = as_csr((1 - 1j * g * Lam) * Kgam - g * M)
    else:
        raise ValueError(f"unknown formulation {form!r}")
    return H_T, H_P, M1, C2


def assemble_blocks(m: Mesh, d: DerivedParams, form=Formulation.REFORMULATED) -> BlockSystem:
    """Block matrices with zero right-hand sides; see :func:`assemble_rhs`."""
    form = Formulation(form)
    M = mass_matrix(m)
    H_T, H_P, M1, C2 = _blocks(M, stiffness_matrix(m), boundary_mass(m, AIR), d, form)
    z = np.zeros(m.num_vertices, dtype=np.complex128)
    return BlockSystem(H_T, H_P, M1, C2, z, z.copy(), form, M)


def assemble_rhs(m: Mesh, S, d: DerivedParams, form=Formulation.REFORMULATED):
    """Right-hand sides for source ``S``.

    The original formulation carries the source only in the temperature row.
    """
    L = load_vector(m, S)
    if Formulation(form) == Formulation.REFORMULATED:
        return -L, 1j * d.gamma * d.lambda_over_m * L
    return -L, np.zeros_like(L)


def general_rhs(m: Mesh, f1, f2):
    return load_vector(m, f1), load_vector(m, f2)


def assemble(m: Mesh, d: DerivedParams, form=Formulation.REFORMULATED, source=None) -> BlockSystem:
    b = assemble_blocks(m, d, form)
    if source is None:
        return b
    return b.with_rhs(*assemble_rhs(m, source, d, form))


def monolithic(b: BlockSystem):
    """``A = [[H_T, M1], [C2, H_P]]`` and ``F = [F1; F2]``."""
    A = as_csr(sp.bmat([[b.H_T, b.M1], [b.C2, b.H_P]], format="csr"))
    return A, np.concatenate([b.F1, b.F2])


def split_blocks(A, n):
    """Inverse of :func:`monolithic` on the matrix."""
    A = sp.csr_matrix(A)
    return (as_csr(A[:n, :n]), as_csr(A[:n, n:]), as_csr(A[n:, :n]), as_csr(A[n:, n:]))


def gaussian_source(center, width, amplitude=1.0):
    """``amplitude * exp(-|x - center|^2 / (2 width^2))``."""
    cx, cy = center

    def S(x, y):
        return amplitude * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width ** 2))

    return S


def row_equivalence(m: Mesh, d: DerivedParams, S=None):
    """Compare the reformulated system with a row combination of the original.

    Subtracting ``i gamma Lambda/scriptM`` times the temperature row from the
    pressure row of the original system should give the reformulated pressure
    row. Returns the relative discrepancies of each piece; the pressure-block
    mass coefficient residual is reported rather than expected to vanish.
    """
    if S is None:
        S = 1.0
    orig = assemble(m, d, Formulation.ORIGINAL, S)
    ref = assemble(m, d, Formulation.REFORMULATED, S)
    s = 1j * d.gamma * d.lambda_over_m

    def rel(X, Y):
        X, Y = sp.csr_matrix(X), sp.csr_matrix(Y)
        den = max(abs(Y).max() if Y.nnz else 0.0, 1e-300)
        diff = X - Y
        return (abs(diff).max() if diff.nnz else 0.0) / den

    def ratio(X, Y):
        X, Y = sp.csr_matrix(X), sp.csr_matrix(Y)
        num = abs(X).max() if X.nnz else 0.0
        return num / max(abs(Y).max() if Y.nnz else 0.0, 1e-300)

    def relv(x, y):
        return float(np.max(np.abs(x - y)) / max(np.max(np.abs(y)), 1e-300))

    M = mass_matrix(m)
    K = stiffness_matrix(m)
    C2_comb = orig.C2 - s * orig.H_T
    HP_comb = orig.H_P - s * orig.M1
    F2_comb = orig.F2 - s * orig.F1
    # coefficient of M left over in the pressure block: (ref - comb) = c * M
    resid = ref.H_P - HP_comb
    c = (resid.multiply(M.conj()).sum() / M.multiply(M.conj()).sum())
    return {
        "temperature_row": max(rel(orig.H_T, ref.H_T), rel(orig.M1, ref.M1), relv(orig.F1, ref.F1)),
        "pressure_coupling": rel(C2_comb, ref.C2),
        # what remains of the original i gamma Lambda K coupling after the combination
        "stiffness_in_coupling": ratio(C2_comb - d.sigma2 * M, d.gamma * d.Lambda * K),
        "pressure_rhs": relv(F2_comb, ref.F2),
        "pressure_mass_residual_coefficient": complex(c),
        "pressure_mass_residual_rel": ratio(resid - c * M, ref.H_P),
    }
