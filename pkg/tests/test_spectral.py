import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from morse_ingard.assembly import BlockSystem, Formulation, assemble_blocks, norms
from morse_ingard.mesh import refine, unit_square
from morse_ingard.sparse import as_csr
from morse_ingard.spectral import (
    EIG_LIMIT,
    HypothesisError,
    check_gs_identity,
    check_jacobi_identity,
    coupling_mu,
    dense_eig,
    garding_alpha,
    garding_alpha_matrix,
    garding_sweep,
    generalized_eig,
    hausdorff,
    inverse_bounds,
    read_spectrum_csv,
    unpreconditioned_spectrum,
    write_spectrum_csv,
)


def _match(a, b):
    return hausdorff(np.sort_complex(a), np.sort_complex(b))


def _scalar_system(n, a, bcoef, c, d):
    I = sp.identity(n, format="csr")
    z = np.zeros(n, dtype=complex)
    return BlockSystem(as_csr(a * I), as_csr(d * I), as_csr(bcoef * I), as_csr(c * I), z, z,
                       Formulation.REFORMULATED, as_csr(I))


# dense eigenvalues ------------------------------------------------------------


def test_eig_diagonal():
    w = dense_eig(np.diag([3.0, -1.0, 2j]))
    assert _match(w, [3, -1, 2j]) < 1e-14


def test_eig_rotation():
    t = 0.3
    R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    assert _match(dense_eig(R), [np.exp(1j * t), np.exp(-1j * t)]) < 1e-14


def test_eig_companion_cube_roots():
    C = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)  # x^3 - 1
    roots = np.exp(2j * np.pi * np.arange(3) / 3)
    assert _match(dense_eig(C), roots) < 1e-13


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_eig_of_similarity(n, seed):
    rng = np.random.default_rng(seed)
    lam = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    V = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + 3 * np.eye(n)
    if np.linalg.cond(V) > 1e4:
        return
    w = dense_eig(V @ np.diag(lam) @ np.linalg.inv(V))
    assert _match(w, lam) <= 1e-8


def test_eig_guards():
    with pytest.raises(ValueError):
        dense_eig(np.ones((2, 3)))
    with pytest.raises(ValueError):
        dense_eig(np.eye(EIG_LIMIT + 1))
    assert dense_eig(np.zeros((0, 0))).size == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 25), st.integers(0, 2**32 - 1))
def test_generalized_eig_matches_qz(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + n * np.eye(n)
    qz = sla.eigvals(A, B)  # QZ, an independent algorithm
    w = generalized_eig(as_csr(A), as_csr(B))
    assert _match(w, qz) <= 1e-9 * max(1.0, np.abs(qz).max())


def test_generalized_eig_simple_cases(rng):
    B = as_csr(sp.diags(rng.random(6) + 1.0))
    np.testing.assert_allclose(generalized_eig(2 * B, B), 2.0, rtol=1e-14)
    A = rng.standard_normal((6, 6))
    assert _match(generalized_eig(as_csr(A), as_csr(sp.identity(6))), np.linalg.eigvals(A)) < 1e-12


def test_hausdorff():
    assert hausdorff([0, 1], [1, 0]) == 0
    assert hausdorff([0], [0, 2]) == 2
    assert hausdorff([], []) == 0
    assert hausdorff([], [1]) == np.inf


# preconditioned spectra -------------------------------------------------------


def test_scalar_closed_form():
    a, bc, c, d = 2.0 + 1j, 0.5j, 1.5, 3.0 - 2j
    mu = bc * c / (a * d)
    s = _scalar_system(4, a, bc, c, d)
    np.testing.assert_allclose(coupling_mu(s), mu, rtol=1e-13)
    jac = check_jacobi_identity(s)
    root = np.sqrt(mu)
    assert _match(jac.eigenvalues, [1 + root] * 4 + [1 - root] * 4) < 1e-12
    gs = check_gs_identity(s)
    assert _match(gs.eigenvalues, [1] * 4 + [1 - mu] * 4) < 1e-12
    assert gs.info["unit_count"] == 4


def test_singular_coupling_rejected():
    s = _scalar_system(3, 1.0, 0.0, 1.0, 1.0)
    np.testing.assert_array_equal(coupling_mu(s), 0)
    with pytest.raises(HypothesisError):
        check_jacobi_identity(s)


@pytest.fixture(scope="module")
def square_system(qepas):
    return assemble_blocks(unit_square(6, "Air"), qepas)


def test_mu_scales_with_coupling(square_system):
    from dataclasses import replace
    mu = coupling_mu(square_system)
    scaled = replace(square_system, M1=as_csr(3.0 * square_system.M1), C2=as_csr(0.5j * square_system.C2))
    assert _match(coupling_mu(scaled), 1.5j * mu) <= 1e-10 * np.abs(mu).max()


@pytest.mark.parametrize("form", list(Formulation))
def test_identities_on_square(form, qepas):
    b = assemble_blocks(unit_square(5, "Air"), qepas, form)
    jac = check_jacobi_identity(b)
    gs = check_gs_identity(b)
    scale = 1 + np.abs(jac.info["mu"]).max()
    assert jac.max_match_error <= 1e-8 * scale
    assert gs.max_match_error <= 1e-8 * scale
    assert jac.passed and gs.passed
    assert gs.info["unit_count"] == b.n


def test_mu_stable_under_refinement(qepas):
    m = unit_square(4, "Air")
    coarse = np.abs(coupling_mu(assemble_blocks(m, qepas))).max()
    fine = np.abs(coupling_mu(assemble_blocks(refine(m), qepas))).max()
    assert abs(fine - coarse) <= 0.2 * coarse


def test_unpreconditioned_spectrum(square_system):
    raw = unpreconditioned_spectrum(square_system, raw=True)
    mass = unpreconditioned_spectrum(square_system)
    assert raw.eigenvalues.size == mass.eigenvalues.size == 2 * square_system.n
    for r in (raw, mass):
        assert r.info["heat_branch"] + r.info["wave_branch"] == r.eigenvalues.size
        assert r.info["min_abs"] > 0
    A = np.block([[X.toarray() for X in row] for row in
                  [[square_system.H_T, square_system.M1], [square_system.C2, square_system.H_P]]])
    assert _match(raw.eigenvalues, np.linalg.eigvals(A)) <= 1e-10 * np.abs(raw.eigenvalues).max()


def test_unpreconditioned_requires_mass(square_system):
    from dataclasses import replace
    with pytest.raises(ValueError):
        unpreconditioned_spectrum(replace(square_system, mass=None))


# coercivity -------------------------------------------------------------------


def test_garding_identity_case():
    n = 4
    G = as_csr(sp.identity(n))
    A = np.eye(2 * n)
    assert garding_alpha_matrix(A, (G, G), 0.0) == pytest.approx(1.0)
    assert garding_alpha_matrix(A, (G, 2 * G), 1.0) == pytest.approx(1.0)


def test_garding_sweep_monotone(square_system):
    m = unit_square(6, "Air")
    grams = norms(m)
    rows, K = garding_sweep(square_system, grams)
    alphas = [a for _, a in rows]
    assert np.all(np.diff(alphas) > 0)
    assert K is not None and garding_alpha(square_system, grams, K) > 0
    assert rows[0][0] == 0.0


def test_inverse_bounds_oracle(square_system):
    M = square_system.mass.toarray()
    S = sla.sqrtm(M)
    Si = np.linalg.inv(S)
    expected = [np.linalg.norm(S @ np.linalg.solve(H.toarray(), M) @ Si, 2)
                for H in (square_system.H_T, square_system.H_P)]
    np.testing.assert_allclose(inverse_bounds(square_system), expected, rtol=1e-8)


def test_spectrum_csv_roundtrip(tmp_path, rng):
    lam = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    p = tmp_path / "s.csv"
    write_spectrum_csv(p, lam)
    assert p.read_text().splitlines()[0] == "Real,Imag"
    back = read_spectrum_csv(p)
    np.testing.assert_array_equal(back, lam[np.lexsort((lam.imag, lam.real))])
