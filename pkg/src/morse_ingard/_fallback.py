"""Pure NumPy/SciPy versions of the routines in ``_kernels.pyx``."""
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular


def csr_matvec(indptr, indices, data, x):
    A = sp.csr_matrix((data, indices, indptr), shape=(indptr.size - 1, x.size))
    return np.asarray(A @ x, dtype=np.complex128)


def ssor(indptr, indices, data, r, omega):
    n = indptr.size - 1
    A = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    d = A.diagonal()
    if np.any(d == 0):
        raise ZeroDivisionError(f"zero diagonal in row {int(np.flatnonzero(d == 0)[0])}")
    L = sp.tril(A, -1, format="csr")
    U = sp.triu(A, 1, format="csr")
    D = sp.diags(d)
    x1 = spsolve_triangular((D / omega + L).tocsr(), r, lower=True)
    rhs = r - L @ x1 + (1.0 / omega - 1.0) * (d * x1)
    return spsolve_triangular((D / omega + U).tocsr(), rhs, lower=False)


def p1_local(vertices, triangles):
    p = vertices[triangles]
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    areas = 0.5 * ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (y[:, 1] - y[:, 0]) * (x[:, 2] - x[:, 0]))
    kloc = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * areas[:, None, None])
    return areas, kloc
