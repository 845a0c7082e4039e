import numpy as np
import pytest

from abelym.dec import build_operators
from abelym.hodge import (
    HmfSpaces,
    closed_cochains,
    coclosed_basis,
    coclosed_projector,
    exact_dirichlet,
    harmonic_dirichlet,
    harmonic_exact,
    harmonic_fields,
    harmonic_neumann,
    hmf_decompose,
    hodge_decompose_closed,
)
from abelym.linalg import as_dense, null_space
from abelym.mesh import gen_cube


def test_circle_harmonic_dim(circle_ops):
    # oracle: null space of d0^T M1 on the circle, computed directly
    oracle = null_space(as_dense(circle_ops.d(0)).T @ circle_ops.M(1)).shape[1]
    assert harmonic_fields(circle_ops, 1).dim == oracle == 1


def test_neumann_dirichlet_dims(disk_ops, annulus_ops, collar_ops, torus_ops):
    assert (harmonic_neumann(disk_ops, 1).dim, harmonic_dirichlet(disk_ops, 1).dim) == (0, 0)
    assert (harmonic_neumann(annulus_ops, 1).dim, harmonic_dirichlet(annulus_ops, 1).dim) == (1, 1)
    assert (harmonic_neumann(collar_ops, 1).dim, harmonic_dirichlet(collar_ops, 1).dim) == (1, 1)
    assert harmonic_fields(torus_ops, 1).dim == 2


def test_closed_complex_spaces_coincide(torus_ops):
    m = torus_ops.mass(1)
    H = harmonic_fields(torus_ops, 1).basis
    assert m.max_angle(H, harmonic_neumann(torus_ops, 1).basis) < 1e-8
    assert m.max_angle(H, harmonic_dirichlet(torus_ops, 1).basis) < 1e-8


def test_bases_orthonormal_and_conditions(annulus_ops):
    ops = annulus_ops
    M1 = ops.M(1)
    d1 = as_dense(ops.d(1))
    for sub in (harmonic_fields(ops, 1), harmonic_neumann(ops, 1), harmonic_dirichlet(ops, 1)):
        B = sub.basis
        assert np.allclose(B.T @ M1 @ B, np.eye(sub.dim), atol=1e-10)
        assert np.abs(d1 @ B).max() <= 1e-8 * max(np.abs(B).max(), 1)
    hN = harmonic_neumann(ops, 1).basis
    # orthogonal to every coboundary: coclosed with zero normal part
    assert np.abs(as_dense(ops.d(0)).T @ M1 @ hN).max() < 1e-10
    hD = harmonic_dirichlet(ops, 1).basis
    assert np.abs(ops.trace(1) @ hD).max() == 0


def test_harmonic_contains_boundary_conditioned(annulus_ops):
    m = annulus_ops.mass(1)
    H = harmonic_fields(annulus_ops, 1).basis
    assert m.contains(H, harmonic_neumann(annulus_ops, 1).basis) < 1e-8
    assert m.contains(H, harmonic_dirichlet(annulus_ops, 1).basis) < 1e-8


def test_hmf_dimension_identity(disk_ops, annulus_ops):
    for ops in (disk_ops, annulus_ops):
        total = (exact_dirichlet(ops, 1).dim + harmonic_neumann(ops, 1).dim
                 + harmonic_exact(ops, 1).dim)
        closed = closed_cochains(ops, 1).shape[1]
        assert total == closed
        assert harmonic_fields(ops, 1).dim == harmonic_neumann(ops, 1).dim + harmonic_exact(ops, 1).dim


def test_hmf_exact_dirichlet_input(disk_ops):
    rng = np.random.default_rng(0)
    f = np.zeros(disk_ops.n(0))
    inner = disk_ops.interior(0)
    f[inner] = rng.standard_normal(len(inner))
    w = disk_ops.d(0) @ f
    s = hmf_decompose(disk_ops, 1, w)
    assert np.allclose(s.e_D, w, atol=1e-12)
    for c in (s.h_N, s.h_E, s.c_N):
        assert np.abs(c).max() < 1e-10


def test_hmf_neumann_input(annulus_ops):
    h = harmonic_neumann(annulus_ops, 1).basis[:, 0]
    s = hmf_decompose(annulus_ops, 1, h)
    assert np.allclose(s.h_N, h, atol=1e-12)
    assert max(np.abs(c).max() for c in (s.e_D, s.h_E, s.c_N)) < 1e-10


@pytest.mark.parametrize("fixture", ["disk_ops", "annulus_ops", "collar_ops", "torus_ops"])
def test_hmf_random(fixture, request):
    ops = request.getfixturevalue(fixture)
    spaces = HmfSpaces(ops, 1)
    m = ops.mass(1)
    rng = np.random.default_rng(5)
    for _ in range(100):
        w = rng.standard_normal(ops.n(1))
        s = spaces.split(w)
        nw = m.norm(w)
        assert m.norm(s.total() - w) <= 1e-8 * nw
        comps = s.components()
        for i in range(4):
            for j in range(i + 1, 4):
                assert abs(m.inner(comps[i], comps[j])) <= 1e-8 * nw**2


def test_hmf_3d():
    ops = build_operators(gen_cube(2))
    rng = np.random.default_rng(1)
    w = rng.standard_normal(ops.n(1))
    s = hmf_decompose(ops, 1, w)
    assert ops.mass(1).norm(s.total() - w) <= 1e-8 * ops.mass(1).norm(w)
    assert harmonic_neumann(ops, 1).dim == 0 and harmonic_dirichlet(ops, 1).dim == 0


def test_hodge_closed_circle(circle_ops):
    u = circle_ops.mesh.oriented_top()
    ex, h, co = hodge_decompose_closed(circle_ops, 1, u)
    assert np.abs(ex).max() < 1e-12 and np.abs(co).max() < 1e-12
    assert np.allclose(h, u)
    f = np.random.default_rng(0).standard_normal(16)
    df = circle_ops.d(0) @ f
    ex, h, co = hodge_decompose_closed(circle_ops, 1, df)
    assert np.allclose(ex, df) and np.abs(h).max() < 1e-12


def test_hodge_closed_rank_identity(torus_ops):
    from abelym.linalg import numerical_rank

    n1 = torus_ops.n(1)
    r_d0 = numerical_rank(torus_ops.d(0))
    r_delta2 = numerical_rank(torus_ops.codifferential(2))
    assert r_d0 + harmonic_fields(torus_ops, 1).dim + r_delta2 == n1
    rng = np.random.default_rng(2)
    w = rng.standard_normal(n1)
    parts = hodge_decompose_closed(torus_ops, 1, w)
    m = torus_ops.mass(1)
    assert m.norm(sum(parts) - w) < 1e-10 * m.norm(w)
    assert abs(m.inner(parts[0], parts[1])) < 1e-10 * m.norm(w) ** 2
    assert abs(m.inner(parts[0], parts[2])) < 1e-10 * m.norm(w) ** 2


def test_hodge_closed_rejects_boundary(disk_ops):
    with pytest.raises(ValueError):
        hodge_decompose_closed(disk_ops, 1, np.zeros(disk_ops.n(1)))


def test_coclosed_projector(circle_ops, torus_ops):
    P = coclosed_projector(circle_ops, 1)
    assert np.allclose(P @ P, P)
    M = circle_ops.M(1)
    assert np.allclose(M @ P, (M @ P).T)
    f = np.random.default_rng(0).standard_normal(16)
    df = circle_ops.d(0) @ f
    assert np.linalg.norm(P @ df) <= 1e-10 * np.linalg.norm(df)
    Q = coclosed_basis(circle_ops, 1).basis
    assert np.allclose(P @ Q, Q)
    assert np.linalg.matrix_rank(P) == 1
    assert coclosed_basis(torus_ops, 1).dim == torus_ops.n(1) - np.linalg.matrix_rank(as_dense(torus_ops.d(0)))


def test_deterministic_basis_signs(annulus_ops):
    B1 = harmonic_neumann(annulus_ops, 1).basis
    B2 = harmonic_neumann(annulus_ops, 1).basis
    assert np.array_equal(B1, B2)
    piv = np.argmax(np.abs(B1), axis=0)
    assert np.all(B1[piv, np.arange(B1.shape[1])] > 0)
