"""Dense eigenvalue diagnostics for coarse meshes.

Covers the unpreconditioned spectrum, the spectra of the block
preconditioned operators, the coupling spectrum ``mu`` that determines them,
and a discrete Garding constant.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .assembly import BlockSystem, monolithic
from .sparse import SingularMatrixError, as_csr, sparse_lu, to_dense

EIG_LIMIT = 2000
ONE_TOL = 1e-8


class SpectrumKind(str, enum.Enum):
    UNPRECONDITIONED = "Unpreconditioned"
    JACOBI = "Jacobi"
    GAUSS_SEIDEL = "GaussSeidel"
    COUPLING_MU = "CouplingMu"


class HypothesisError(ValueError):
    """The system does not satisfy the assumptions of a spectral identity."""


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    kind: SpectrumKind
    mesh_id: str = ""
    max_match_error: float = float("nan")
    checks: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def dense_eig(A) -> np.ndarray:
    """All eigenvalues (with multiplicity) of a dense square matrix.

    LAPACK ``geev``: Hessenberg reduction followed by shifted QR.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"square matrix required, got shape {A.shape}")
    if A.shape[0] > EIG_LIMIT:
        raise ValueError(f"dimension {A.shape[0]} exceeds the dense eigensolver limit {EIG_LIMIT}")
    if A.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    w = np.linalg.eigvals(A)
    if not np.all(np.isfinite(w)):
        raise np.linalg.LinAlgError("eigenvalue iteration produced non-finite values")
    return w


def _solve_dense(B, X):
    """``B^{-1} X`` for sparse ``B`` and sparse or dense ``X``."""
    X = to_dense(X) if sp.issparse(X) else np.asarray(X, dtype=np.complex128)
    return sparse_lu(B).solve(X)


def generalized_eig(A, B) -> np.ndarray:
    """Eigenvalues of ``B^{-1} A`` by sparse factorization then dense QR."""
    if A.shape[0] > EIG_LIMIT:
        raise ValueError(f"dimension {A.shape[0]} exceeds the dense eigensolver limit {EIG_LIMIT}")
    return dense_eig(_solve_dense(B, A))


def hausdorff(a, b) -> float:
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return float("inf")
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def jacobi_preconditioner(b: BlockSystem):
    return as_csr(sp.block_diag([b.H_T, b.H_P], format="csr"))


def gauss_seidel_preconditioner(b: BlockSystem):
    return as_csr(sp.bmat([[b.H_T, None], [b.C2, b.H_P]], format="csr"))


def coupling_matrix(b: BlockSystem) -> np.ndarray:
    """Dense ``H_T^{-1} M1 H_P^{-1} C2``."""
    return _solve_dense(b.H_T, b.M1) @ _solve_dense(b.H_P, b.C2)


def coupling_mu(b: BlockSystem) -> np.ndarray:
    return dense_eig(coupling_matrix(b))


def _check_couplings(b: BlockSystem):
    for name, X in (("M1", b.M1), ("C2", b.C2)):
        try:
            sparse_lu(X)
        except SingularMatrixError as exc:
            raise HypothesisError(f"coupling block {name} is singular: {exc}") from exc


def check_jacobi_identity(b: BlockSystem, mesh_id="") -> SpectrumReport:
    """Compare the block-Jacobi spectrum with ``1 +/- sqrt(mu)``."""
    _check_couplings(b)
    A, _ = monolithic(b)
    lam = generalized_eig(A, jacobi_preconditioner(b))
    mu = coupling_mu(b)
    root = np.sqrt(mu)
    predicted = np.concatenate([1 + root, 1 - root])
    err = hausdorff(lam, predicted)
    dist_one = float(np.abs(lam - 1).min())
    max_mu = float(np.abs(mu).max())
    return SpectrumReport(
        lam, SpectrumKind.JACOBI, mesh_id, err,
        checks={"no_unit_eigenvalue": dist_one > 1e-10},
        info={"mu": mu, "min_dist_to_one": dist_one, "max_abs_mu": max_mu,
              "max_dist_to_one": float(np.abs(lam - 1).max()), "ball_radius": float(np.sqrt(max_mu))},
    )


def check_gs_identity(b: BlockSystem, mesh_id="") -> SpectrumReport:
    """Compare the block Gauss-Seidel spectrum with ``{1} (n times) and 1 - mu``."""
    n = b.n
    A, _ = monolithic(b)
    lam = generalized_eig(A, gauss_seidel_preconditioner(b))
    mu = coupling_mu(b)
    order = np.argsort(np.abs(lam - 1), kind="stable")
    n_unit = int(np.count_nonzero(np.abs(lam - 1) <= ONE_TOL))
    rest = lam[order[n:]]
    err = hausdorff(rest, 1 - mu)
    max_mu = float(np.abs(mu).max())
    return SpectrumReport(
        lam, SpectrumKind.GAUSS_SEIDEL, mesh_id, err,
        checks={"unit_multiplicity": n_unit >= n,
                "ball": bool(np.all(np.abs(lam - 1) <= max_mu + 1e-7))},
        info={"mu": mu, "unit_count": n_unit, "max_abs_mu": max_mu,
              "max_dist_to_one": float(np.abs(lam - 1).max())},
    )


def unpreconditioned_spectrum(b: BlockSystem, raw=False, mesh_id="") -> SpectrumReport:
    """Eigenvalues of ``A`` relative to ``blockdiag(M, M)`` (or of ``A`` itself if ``raw``)."""
    A, _ = monolithic(b)
    if raw:
        lam = dense_eig(to_dense(A))
    else:
        if b.mass is None:
            raise ValueError("block system carries no mass matrix")
        lam = generalized_eig(A, sp.block_diag([b.mass, b.mass], format="csr"))
    heat = int(np.count_nonzero(np.abs(lam.imag) > np.abs(lam.real)))
    return SpectrumReport(
        lam, SpectrumKind.UNPRECONDITIONED, mesh_id,
        info={"min_abs": float(np.abs(lam).min()), "heat_branch": heat, "wave_branch": lam.size - heat},
    )


def _block_gram(G):
    return sp.block_diag([G, G], format="csr")


def garding_alpha(b: BlockSystem, grams, K_shift: float) -> float:
    """Smallest ``alpha`` with ``Re a(U,U) + K ||U||^2 >= alpha ||U||_{H1}^2`` on the discrete space.

    ``grams`` is the ``(G_L2, G_H1)`` pair from :func:`assembly.norms`.
    """
    A, _ = monolithic(b)
    return garding_alpha_matrix(to_dense(A), grams, K_shift)


def garding_alpha_matrix(A, grams, K_shift: float) -> float:
    G_L2, G_H1 = grams
    n2 = A.shape[0]
    L2 = to_dense(_block_gram(G_L2)) if G_L2.shape[0] != n2 else to_dense(G_L2)
    H1 = to_dense(_block_gram(G_H1)) if G_H1.shape[0] != n2 else to_dense(G_H1)
    herm = 0.5 * (A + A.conj().T) + K_shift * L2
    try:
        w = sla.eigh(herm, H1, eigvals_only=True, subset_by_index=[0, 0])
    except np.linalg.LinAlgError as exc:
        raise ValueError("H1 Gram matrix is not positive definite") from exc
    return float(w[0])


def garding_sweep(b: BlockSystem, grams, K_start=0.125, max_doublings=20, extra=3):
    """Evaluate ``alpha`` at ``K = 0`` and then at ``K_start * 2**k``.

    Doubling stops ``extra`` steps after the first positive ``alpha``.
    Returns the ``(K, alpha)`` pairs and the first ``K`` with ``alpha > 0``
    (``None`` if never reached).
    """
    A, _ = monolithic(b)
    A = to_dense(A)
    rows = [(0.0, garding_alpha_matrix(A, grams, 0.0))]
    found = 0.0 if rows[0][1] > 0 else None
    K = K_start
    left = extra if found is not None else max_doublings
    while left > 0:
        a = garding_alpha_matrix(A, grams, K)
        rows.append((K, a))
        left -= 1
        if a > 0 and found is None:
            found, left = K, extra
        K *= 2
    return rows, found


def inverse_bounds(b: BlockSystem):
    """L2-geometry norms of ``H_T^{-1} M`` and ``H_P^{-1} M`` (estimates of C_T, C_P).

    In the M-inner product ``||X||_M = ||L^H X L^{-H}||_2`` with ``M = L L^H``.
    """
    M = to_dense(b.mass)
    L = np.linalg.cholesky(M)
    out = []
    for H in (b.H_T, b.H_P):
        X = _solve_dense(H, M)
        Y = L.conj().T @ sla.solve_triangular(L.conj().T, X.T, lower=False, trans="T").T
        out.append(float(np.linalg.norm(Y, 2)))
    return tuple(out)


def write_spectrum_csv(path, eigenvalues):
    """CSV with header ``Real,Imag``, rows sorted by real then imaginary part."""
    lam = np.asarray(eigenvalues)
    order = np.lexsort((lam.imag, lam.real))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Real", "Imag"])
        for z in lam[order]:
            w.writerow([repr(float(z.real)), repr(float(z.imag))])


def read_spectrum_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["Real"]) + 1j * float(r["Imag"]) for r in rows])
