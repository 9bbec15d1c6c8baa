import numpy as np
import pytest
from scipy.integrate import quad

from spectral_vms.fem import (
    GalerkinMatrices,
    Mesh1D,
    SingularPivotError,
    TridiagonalMatrix,
    assemble_galerkin,
    build_mesh,
    galerkin_load_stationary,
    p1_load,
    thomas_solve,
    tri_combine,
)


def hat(mesh, l):
    """Hat function centered at node l (callable)."""
    x_l = mesh.nodes[l]
    h = mesh.h

    def phi(x):
        return np.maximum(0.0, 1.0 - np.abs(x - x_l) / h)

    return phi


def test_build_mesh_examples():
    m = build_mesh(2)
    assert np.allclose(m.nodes, [0.0, 0.5, 1.0])
    assert m.h == 0.5
    assert build_mesh(40).h == 0.025
    assert build_mesh(50).h == 0.02


def test_build_mesh_rejects_small():
    with pytest.raises(ValueError):
        build_mesh(1)


def test_mesh_uniform_spacing():
    for n in (2, 7, 160):
        m = build_mesh(n)
        assert np.all(np.abs(np.diff(m.nodes) - m.h) <= 1e-14)
        assert m.n_interior == n - 1
        assert len(m.interior_nodes) == n - 1


def test_galerkin_entries():
    # single interior node at h = 1/2
    g2 = assemble_galerkin(build_mesh(2))
    assert np.allclose(g2.mass.diag, 1.0 / 3.0)
    assert np.allclose(g2.stiffness.diag, 4.0)
    assert np.allclose(g2.convection.diag, 0.0)
    # generic mesh: 2h/3, h/6 mass; 2/h, -1/h stiffness; antisymmetric 1/2
    g4 = assemble_galerkin(build_mesh(4))
    h = 0.25
    assert np.allclose(g4.mass.diag, 2.0 * h / 3.0)
    assert np.allclose(g4.mass.sub, h / 6.0)
    assert np.allclose(g4.mass.sup, h / 6.0)
    assert np.allclose(g4.stiffness.diag, 2.0 / h)
    assert np.allclose(g4.stiffness.sub, -1.0 / h)
    assert np.allclose(g4.convection.diag, 0.0)
    assert np.allclose(g4.convection.sub, -0.5)
    assert np.allclose(g4.convection.sup, 0.5)


def test_galerkin_vs_quadrature_oracle():
    mesh = build_mesh(7)
    g = assemble_galerkin(mesh)
    n = mesh.n_interior
    for l in range(1, n + 1):
        for m in range(max(1, l - 1), min(n, l + 1) + 1):
            pl, pm = hat(mesh, l), hat(mesh, m)
            lo = max(0.0, mesh.nodes[min(l, m)] - mesh.h)
            hi = min(1.0, mesh.nodes[max(l, m)] + mesh.h)
            mass_ref = quad(lambda x: pl(x) * pm(x), lo, hi, epsabs=1e-13)[0]
            dense = g.mass.dense()
            assert abs(dense[l - 1, m - 1] - mass_ref) < 1e-12
            # convection row l holds (phi_m', phi_l); the derivative of the
            # hat is +-1/h on its two support elements
            x_m = mesh.nodes[m]

            def dpm(x):
                return np.where(
                    (x > x_m - mesh.h) & (x < x_m), 1.0 / mesh.h,
                    np.where((x > x_m) & (x < x_m + mesh.h), -1.0 / mesh.h, 0.0),
                )

            conv_ref = quad(
                lambda x: dpm(x) * pl(x), lo, hi,
                points=[x_m - mesh.h, x_m, x_m + mesh.h], epsabs=1e-13, limit=200,
            )[0]
            assert abs(g.convection.dense()[l - 1, m - 1] - conv_ref) < 1e-12


def test_symmetry_invariants():
    g = assemble_galerkin(build_mesh(13))
    for mat in (g.mass, g.stiffness):
        assert np.all(np.abs(mat.dense() - mat.dense().T) <= 1e-14)
    c = g.convection.dense()
    assert np.all(np.abs(c + c.T) <= 1e-14)


def test_load_examples():
    mesh = build_mesh(40)
    b = galerkin_load_stationary(mesh, 0.0, 1.0)
    assert np.allclose(b, -mesh.h)
    b = galerkin_load_stationary(mesh, 1.0, 0.0)
    l_mid = 19  # node at x=0.5 is interior node index 19 (x_20 = 0.5)
    assert abs(mesh.interior_nodes[l_mid] - 0.5) < 1e-14
    assert abs(b[l_mid] - (-0.0125)) < 1e-14
    b = galerkin_load_stationary(mesh, 1000.0, 1.0)
    assert abs(b[l_mid] - (-12.525)) < 1e-12


def test_load_matches_p1_load_for_affine():
    mesh = build_mesh(25)
    gamma, c = 7.5, -3.0
    g = -gamma * mesh.nodes - c
    assert np.allclose(p1_load(mesh, g), galerkin_load_stationary(mesh, gamma, c), atol=1e-15)


def test_p1_load_vs_quadrature():
    mesh = build_mesh(6)
    rng = np.random.default_rng(3)
    vals = rng.normal(size=mesh.n_elements + 1)
    field = lambda x: np.interp(x, mesh.nodes, vals)
    b = p1_load(mesh, vals)
    for l in range(1, mesh.n_interior + 1):
        phi = hat(mesh, l)
        lo, hi = mesh.nodes[l] - mesh.h, mesh.nodes[l] + mesh.h
        ref = quad(lambda x: field(x) * phi(x), lo, hi, epsabs=1e-13, limit=100)[0]
        assert abs(b[l - 1] - ref) < 1e-10


def test_thomas_identity():
    a = TridiagonalMatrix(np.zeros(2), np.ones(3), np.zeros(2))
    rhs = np.array([1.0, 0.0, 0.0])
    assert np.allclose(thomas_solve(a, rhs), rhs)


def test_thomas_3x3_example():
    a = TridiagonalMatrix(np.array([-1.0, -1.0]), np.array([2.0, 2.0, 2.0]), np.array([-1.0, -1.0]))
    x = thomas_solve(a, np.array([1.0, 0.0, 0.0]))
    assert np.allclose(x, [0.75, 0.5, 0.25])


def test_thomas_vs_dense_oracle():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = 50
        sub = rng.normal(size=n - 1)
        sup = rng.normal(size=n - 1)
        diag = np.abs(rng.normal(size=n)) + 3.0  # diagonally dominant
        a = TridiagonalMatrix(sub, diag, sup)
        rhs = rng.normal(size=n)
        x = thomas_solve(a, rhs)
        ref = np.linalg.solve(a.dense(), rhs)
        assert np.max(np.abs(x - ref)) <= 1e-10 * max(1.0, np.max(np.abs(ref)))
        res = np.max(np.abs(a.matvec(x) - rhs))
        assert res <= 1e-10 * (a.norm_inf() * np.max(np.abs(x)) + np.max(np.abs(rhs)))


def test_thomas_singular_pivot_index():
    a = TridiagonalMatrix(np.zeros(1), np.array([0.0, 1.0]), np.zeros(1))
    with pytest.raises(SingularPivotError) as exc:
        thomas_solve(a, np.ones(2))
    assert exc.value.index == 0
    # second pivot vanishes: 1 - 1*1 = 0
    a = TridiagonalMatrix(np.array([1.0, 0.0]), np.ones(3), np.array([1.0, 0.0]))
    with pytest.raises(SingularPivotError) as exc:
        thomas_solve(a, np.ones(3))
    assert exc.value.index == 1


def test_poisson_nodal_exactness():
    mu = 3.0
    mesh = build_mesh(17)
    g = assemble_galerkin(mesh)
    rhs = p1_load(mesh, np.ones(mesh.n_elements + 1))
    u = thomas_solve(mu * g.stiffness, rhs)
    exact = mesh.interior_nodes * (1.0 - mesh.interior_nodes) / (2.0 * mu)
    assert np.max(np.abs(u - exact)) < 1e-10


def test_tridiagonal_algebra():
    rng = np.random.default_rng(7)
    a = TridiagonalMatrix(rng.normal(size=4), rng.normal(size=5), rng.normal(size=4))
    x = rng.normal(size=5)
    assert np.allclose(a.matvec(x), a.dense() @ x)
    assert np.allclose(a.transpose().dense(), a.dense().T)
    assert np.allclose((2.5 * a).dense(), 2.5 * a.dense())
    b = TridiagonalMatrix(rng.normal(size=4), rng.normal(size=5), rng.normal(size=4))
    assert np.allclose((a + b).dense(), a.dense() + b.dense())
    comb = tri_combine([(2.0, a), (-1.0, b)])
    assert np.allclose(comb.dense(), 2.0 * a.dense() - b.dense())
    assert abs(a.norm_inf() - np.abs(a.dense()).sum(axis=1).max()) < 1e-15
