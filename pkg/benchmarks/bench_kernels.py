"""Compiled kernels versus the NumPy/SciPy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--h 0.25] [--refinements 3] [--repeats 5]

Times ``csr_matvec``, ``ssor`` and ``p1_local`` on the pressure block of
the fork problem, plus one approximate-inner-solve Gauss-Seidel solve with
each backend.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from morse_ingard import _fallback, kernels
from morse_ingard.assembly import assemble
from morse_ingard.krylov import ApproxGmres, PcKind, PrecondSpec, solve_system
from morse_ingard.mesh import ForkGeometry
from morse_ingard.params import derive, qepas_params
from morse_ingard.studies import default_source, fork_levels


def _best(fn, repeats):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeats)) / number


def kernel_table(h, refinements, repeats):
    try:
        from morse_ingard import _kernels as compiled
    except ImportError:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    m = fork_levels(ForkGeometry(), h, refinements)[-1]
    b = assemble(m, derive(qepas_params()))
    A = b.H_P
    rng = np.random.default_rng(0)
    x = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
    cases = {
        "csr_matvec": lambda impl: kernels.csr_matvec(A, x, impl=impl),
        "ssor": lambda impl: kernels.ssor(A, x, 1.0, impl=impl),
        "p1_local": lambda impl: kernels.p1_local(m.vertices, m.triangles, impl=impl),
    }
    print(f"mesh: {m.num_vertices} vertices, {m.num_triangles} triangles, nnz(H_P)={A.nnz}")
    print(f"{'kernel':<12}{'compiled [s]':>14}{'fallback [s]':>14}{'speedup':>10}")
    for name, fn in cases.items():
        tc = _best(lambda: fn(compiled), repeats)
        tf = _best(lambda: fn(_fallback), repeats)
        print(f"{name:<12}{tc:>14.3e}{tf:>14.3e}{tf / tc:>10.1f}")


def solve_time(h, refinements):
    m = fork_levels(ForkGeometry(), h, refinements)[-1]
    b = assemble(m, derive(qepas_params()), source=default_source())
    _, _, rep = solve_system(b, PrecondSpec(PcKind.GAUSS_SEIDEL, ApproxGmres(10, "SSOR")))
    print(f"{kernels.BACKEND:<9} GS/ApproxGmres(10, SSOR): {rep.summary()}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.25)
    ap.add_argument("--refinements", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--solve-only", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.solve_only:
        solve_time(args.h, args.refinements)
        return
    kernel_table(args.h, args.refinements, args.repeats)
    sys.stdout.flush()
    # the backend is chosen at import, so each end-to-end solve runs in its own interpreter
    for pure in ("0", "1"):
        env = dict(os.environ, MORSE_INGARD_PURE=pure)
        subprocess.run([sys.executable, __file__, "--solve-only", "--h", str(args.h),
                        "--refinements", str(args.refinements)], env=env, check=True)


if __name__ == "__main__":
    main()
