"""Restarted GMRES / flexible GMRES and the block preconditioners.

Block Jacobi keeps the two diagonal blocks ``diag(H_T, H_P)``; block
Gauss-Seidel keeps the lower triangle ``[[H_T, 0], [C2, H_P]]``. The diagonal
blocks are inverted either exactly (sparse LU) or approximately by a few
smoothed GMRES iterations, in which case the preconditioner changes from
one application to the next and the outer solver must be flexible GMRES.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels
from .assembly import BlockSystem, monolithic
from .sparse import as_csr, sparse_lu

BREAKDOWN_TOL = 1e-14


class PcKind(str, enum.Enum):
    NONE = "None"
    JACOBI = "BlockJacobi"
    GAUSS_SEIDEL = "BlockGaussSeidel"


@dataclass(frozen=True)
class ExactLU:
    pass


@dataclass(frozen=True)
class ApproxGmres:
    sweeps: int = 10
    smoother: str = "SSOR"  # or "Diagonal"

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be at least 1")
        if self.smoother not in ("SSOR", "Diagonal"):
            raise ValueError(f"unknown smoother {self.smoother!r}")


@dataclass(frozen=True)
class PrecondSpec:
    kind: PcKind = PcKind.GAUSS_SEIDEL
    inner: ExactLU | ApproxGmres = field(default_factory=ExactLU)

    def __post_init__(self):
        object.__setattr__(self, "kind", PcKind(self.kind))

    @property
    def label(self) -> str:
        k = {PcKind.NONE: "none", PcKind.JACOBI: "add", PcKind.GAUSS_SEIDEL: "mult"}[self.kind]
        if self.kind == PcKind.NONE:
            return k
        return k + ("lu" if isinstance(self.inner, ExactLU) else "gmres")


@dataclass
class SolveReport:
    iterations: int
    residual_history: list
    converged: bool
    wall_time: float
    n: int
    criterion: str

    def summary(self) -> str:
        last = self.residual_history[-1] if self.residual_history else 0.0
        first = self.residual_history[0] if self.residual_history else 0.0
        rel = last / first if first else 0.0
        return (f"n={self.n} its={self.iterations} converged={self.converged} "
                f"rel_residual={rel:.3e} ({self.criterion}) time={self.wall_time:.3f}s")


def _action(op):
    if op is None:
        return lambda v: v.copy()
    if callable(op) and not sp.issparse(op) and not isinstance(op, np.ndarray):
        return op
    if sp.issparse(op):
        A = as_csr(op)
        return lambda v: kernels.csr_matvec(A, v)
    return lambda v: op @ v


def _arnoldi_step(V, H, j, w):
    """Modified Gram-Schmidt with one reorthogonalization pass."""
    w0 = np.linalg.norm(w)
    for _ in range(2):
        for i in range(j + 1):
            c = np.vdot(V[i], w)
            H[i, j] += c
            w -= c * V[i]
    h = np.linalg.norm(w)
    H[j + 1, j] = h
    if h > 0:
        V[j + 1] = w / h
    return h, w0


def _givens(H, cs, sn, g, j):
    for i in range(j):
        t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
        H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
        H[i, j] = t
    a, b = H[j, j], H[j + 1, j]
    r = np.hypot(abs(a), abs(b))
    if r == 0.0:
        cs[j], sn[j] = 1.0, 0.0
    else:
        cs[j] = abs(a) / r
        sn[j] = (a / abs(a) if a != 0 else 1.0) * np.conj(b) / r
    H[j, j] = cs[j] * a + sn[j] * b
    H[j + 1, j] = 0.0
    g[j + 1] = -np.conj(sn[j]) * g[j]
    g[j] = cs[j] * g[j]


def _krylov(A, b, M, rtol, restart, maxit, x0, flexible):
    t0 = time.perf_counter()
    Aop, Mop = _action(A), _action(M)
    b = np.asarray(b, dtype=np.complex128)
    n = b.shape[0]
    criterion = "true" if flexible else "preconditioned"
    x = np.zeros(n, dtype=np.complex128) if x0 is None else np.array(x0, dtype=np.complex128)
    if not np.any(b):
        return np.zeros(n, dtype=np.complex128), SolveReport(0, [0.0], True, time.perf_counter() - t0, n, criterion)

    def residual(x):
        r = b - Aop(x) if np.any(x) else b.copy()
        return r if flexible else Mop(r)

    bnorm = np.linalg.norm(b if flexible else Mop(b))
    target = rtol * bnorm
    r = residual(x)
    beta = np.linalg.norm(r)
    history = [float(beta)]
    its = 0
    converged = beta <= target
    while not converged and its < maxit:
        m = min(restart, maxit - its)
        V = np.zeros((m + 1, n), dtype=np.complex128)
        Z = np.zeros((m, n), dtype=np.complex128) if flexible else None
        H = np.zeros((m + 1, m), dtype=np.complex128)
        cs = np.zeros(m)
        sn = np.zeros(m, dtype=np.complex128)
        g = np.zeros(m + 1, dtype=np.complex128)
        g[0] = beta
        V[0] = r / beta
        k = 0
        breakdown = False
        for j in range(m):
            if flexible:
                Z[j] = Mop(V[j])
                w = Aop(Z[j])
            else:
                w = Mop(Aop(V[j]))
            h, w0 = _arnoldi_step(V, H, j, w)
            _givens(H, cs, sn, g, j)
            its += 1
            k = j + 1
            history.append(float(abs(g[j + 1])))
            if h <= BREAKDOWN_TOL * max(w0, 1e-300):
                breakdown = True
                break
            if abs(g[j + 1]) <= target:
                break
        y = _backsolve(H[:k, :k], g[:k])
        x += (Z[:k] if flexible else V[:k]).T @ y
        r = residual(x)
        beta = np.linalg.norm(r)
        history[-1] = float(beta)
        converged = beta <= target
        if breakdown or beta == 0.0:
            break
    return x, SolveReport(its, history, bool(converged), time.perf_counter() - t0, n, criterion)


def _backsolve(R, g):
    k = g.shape[0]
    y = np.zeros(k, dtype=np.complex128)
    for i in range(k - 1, -1, -1):
        y[i] = (g[i] - R[i, i + 1:] @ y[i + 1:]) / R[i, i]
    return y


def gmres(A, b, M=None, rtol=1e-8, restart=30, maxit=2000, x0=None):
    """Left-preconditioned restarted GMRES.

    Stops when ``||M (b - A x)|| <= rtol ||M b||``. ``A`` and ``M`` may be
    sparse matrices, dense arrays or callables; ``M=None`` is the identity.
    Returns ``(x, SolveReport)``; on hitting ``maxit`` the last iterate is
    returned with ``converged=False``.
    """
    return _krylov(A, b, M, rtol, restart, maxit, x0, flexible=False)


def fgmres(A, b, M=None, rtol=1e-8, restart=30, maxit=2000, x0=None):
    """Right-preconditioned flexible GMRES; ``M`` may change between calls.

    Stops when ``||b - A x|| <= rtol ||b||``.
    """
    return _krylov(A, b, M, rtol, restart, maxit, x0, flexible=True)


class LUInner:
    def __init__(self, H):
        self._f = sparse_lu(H)

    def solve(self, r):
        return self._f.solve(r)


class GmresInner:
    """Fixed number of smoothed GMRES iterations from a zero guess."""

    def __init__(self, H, sweeps=10, smoother="SSOR"):
        self.H = as_csr(H)
        self.sweeps = sweeps
        if smoother == "SSOR":
            self.M = lambda v: kernels.ssor(self.H, v, 1.0)
        else:
            dinv = 1.0 / self.H.diagonal()
            self.M = lambda v: dinv * v

    def solve(self, r):
        x, _ = gmres(self.H, r, self.M, rtol=0.0, restart=self.sweeps, maxit=self.sweeps)
        return x


def make_inner(H, inner):
    if isinstance(inner, ExactLU):
        return LUInner(H)
    if isinstance(inner, ApproxGmres):
        return GmresInner(H, inner.sweeps, inner.smoother)
    raise TypeError(f"unknown inner solver {inner!r}")


def prepare_inner(b: BlockSystem, inner):
    """Inner solvers for ``H_T`` and ``H_P``."""
    return make_inner(b.H_T, inner), make_inner(b.H_P, inner)


def apply_block_jacobi(b: BlockSystem, inner, r_T, r_P):
    sT, sP = inner
    return sT.solve(r_T), sP.solve(r_P)


def apply_block_gauss_seidel(b: BlockSystem, inner, r_T, r_P):
    sT, sP = inner
    z_T = sT.solve(r_T)
    return z_T, sP.solve(r_P - kernels.csr_matvec(b.C2, z_T))


class BlockPreconditioner:
    """Callable acting on stacked ``[r_T; r_P]`` vectors."""

    def __init__(self, b: BlockSystem, kind, inner=ExactLU()):
        self.b = b
        self.kind = PcKind(kind)
        if self.kind == PcKind.NONE:
            raise ValueError("no block preconditioner for kind None")
        self.inner = prepare_inner(b, inner)
        self._apply = apply_block_jacobi if self.kind == PcKind.JACOBI else apply_block_gauss_seidel

    def __call__(self, r):
        n = self.b.n
        z_T, z_P = self._apply(self.b, self.inner, r[:n], r[n:])
        return np.concatenate([z_T, z_P])


def solve_system(b: BlockSystem, spec: PrecondSpec = PrecondSpec(), rtol=1e-8, restart=30, maxit=2000):
    """Solve the block system; returns ``(T, P, SolveReport)``.

    Exact inner solves use left-preconditioned GMRES, approximate ones
    flexible GMRES. The wall time includes preconditioner setup.
    """
    t0 = time.perf_counter()
    A, F = monolithic(b)
    if spec.kind == PcKind.NONE:
        x, rep = gmres(A, F, None, rtol, restart, maxit)
    else:
        P = BlockPreconditioner(b, spec.kind, spec.inner)
        solver = gmres if isinstance(spec.inner, ExactLU) else fgmres
        x, rep = solver(A, F, P, rtol, restart, maxit)
    rep.wall_time = time.perf_counter() - t0
    return x[:b.n], x[b.n:], rep
