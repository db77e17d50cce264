"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting the environment
variable ``MORSE_INGARD_PURE=1`` forces the NumPy/SciPy fallback.
"""
import os

import numpy as np

from . import _fallback

_compiled = None
if os.environ.get("MORSE_INGARD_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _fallback
BACKEND = "compiled" if _compiled is not None else "python"


def _csr_arrays(A):
    return A.indptr, A.indices, np.ascontiguousarray(A.data, dtype=np.complex128)


def csr_matvec(A, x, impl=None):
    """``A @ x`` for a canonical complex CSR matrix, summing each row in index order."""
    impl = impl or _impl
    x = np.ascontiguousarray(x, dtype=np.complex128)
    return impl.csr_matvec(*_csr_arrays(A), x)


def ssor(A, r, omega=1.0, impl=None):
    """Symmetric SOR sweep pair for ``A x = r`` starting from zero."""
    impl = impl or _impl
    r = np.ascontiguousarray(r, dtype=np.complex128)
    return impl.ssor(*_csr_arrays(A), r, float(omega))


def p1_local(vertices, triangles, impl=None):
    """Per-triangle areas and P1 element stiffness matrices."""
    impl = impl or _impl
    return impl.p1_local(np.ascontiguousarray(vertices, dtype=float),
                         np.ascontiguousarray(triangles, dtype=np.int64))
