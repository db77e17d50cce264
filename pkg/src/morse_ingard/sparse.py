"""Complex sparse matrices in compressed-row form.

``ComplexCSR`` is ``scipy.sparse.csr_matrix`` with complex128 values, sorted
column indices and no stored duplicates; :func:`as_csr` puts any sparse or
dense input into that canonical form.
"""
from __future__ import annotations

import numpy as np
import scipy.io
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels

ComplexCSR = sp.csr_matrix

DENSE_LIMIT = 4_000_000
PIVOT_TOL = 1e-14


class SingularMatrixError(ArithmeticError):
    pass


class DimensionError(ValueError):
    pass


def as_csr(A) -> ComplexCSR:
    """Canonical complex CSR copy of ``A`` (explicit zeros kept out)."""
    A = sp.csr_matrix(A, dtype=np.complex128, copy=True)
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    return A


def spmv(A: ComplexCSR, x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1 or x.shape[0] != A.shape[1]:
        raise DimensionError(f"cannot multiply {A.shape} matrix by vector of shape {x.shape}")
    return kernels.csr_matvec(A, x)


class LUFactors:
    """Sparse LU with partial pivoting and an approximate-minimum-degree column ordering (COLAMD).

    Wraps SuperLU. Solves with a given factorization are deterministic.
    """

    def __init__(self, A):
        A = sp.csc_matrix(A, dtype=np.complex128)
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"LU needs a square matrix, got {A.shape}")
        self.shape = A.shape
        scale = abs(A).max() if A.nnz else 0.0
        if scale == 0.0:
            raise SingularMatrixError("zero matrix")
        try:
            self._lu = spla.splu(A, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise SingularMatrixError(str(exc)) from exc
        piv = np.abs(self._lu.U.diagonal())
        if piv.min() < PIVOT_TOL * scale:
            raise SingularMatrixError(
                f"pivot {piv.min():.3e} below {PIVOT_TOL:g} * max|A| ({scale:.3e})")

    @property
    def perm_r(self):
        return self._lu.perm_r

    @property
    def perm_c(self):
        return self._lu.perm_c

    def solve(self, b):
        b = np.asarray(b, dtype=np.complex128)
        if b.shape[0] != self.shape[0]:
            raise DimensionError(f"right-hand side has {b.shape[0]} rows, expected {self.shape[0]}")
        return self._lu.solve(b)


def sparse_lu(A) -> LUFactors:
    return LUFactors(A)


def lu_solve(f: LUFactors, b) -> np.ndarray:
    return f.solve(b)


def to_dense(A) -> np.ndarray:
    if A.shape[0] * A.shape[1] > DENSE_LIMIT:
        raise DimensionError(
            f"{A.shape[0]}x{A.shape[1]} exceeds the dense limit of {DENSE_LIMIT} entries")
    return np.asarray(A.toarray(), dtype=np.complex128)


def write_matrix_market(path, A):
    """Matrix Market coordinate export, complex general, 1-based."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(A, dtype=np.complex128), field="complex",
                     symmetry="general")
