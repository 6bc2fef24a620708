import numpy as np
import pytest
from numpy.polynomial import legendre as npleg

from conftest import smooth_model
from stochwave.coefficients import (CoefficientModel, assemble_A, assemble_field, assemble_grad_A,
                                    build_preset, constant_model, perturbed)
from stochwave.gpc import make_basis
from stochwave.mesh import LocalBasis, build_mesh


def test_constant_coefficient_gives_scaled_identity():
    gpc = make_basis(2, 3)
    A = assemble_A(constant_model(1.7), gpc, 0.2, 0.4)
    np.testing.assert_allclose(A, 1.7 * np.eye(gpc.size), atol=1e-13)


def test_test1_without_noise_gives_identity():
    gpc = make_basis(2, 4)
    A = assemble_A(build_preset("test1", 0.0).model, gpc, 0.3, 1.1)
    np.testing.assert_allclose(A, np.eye(15), atol=1e-13)


def _oracle_A(delta, P, n=40):
    """Test 1 matrix from an independent 40-point tensor Gauss rule."""
    s, w = npleg.leggauss(n)
    w = w / 2
    idx = [(a, b) for d in range(P + 1) for a in range(d, -1, -1) for b in [d - a]]
    Y1, Y2 = np.meshgrid(s, s, indexing="ij")
    W = np.outer(w, w)
    a = np.sqrt(2.0 / ((1 + delta * Y1) ** 2 + (1 + delta * Y2) ** 2))

    def phi(n_, y):
        c = np.zeros(n_ + 1)
        c[n_] = np.sqrt(2 * n_ + 1)
        return npleg.legval(y, c)

    Phi = [phi(i, Y1) * phi(j, Y2) for i, j in idx]
    return np.array([[np.sum(W * a * p * q) for q in Phi] for p in Phi])


def test_test1_matrix_against_high_order_oracle():
    gpc = make_basis(2, 4)
    A = assemble_A(build_preset("test1", 0.01).model, gpc, 1.0, 1.0)
    np.testing.assert_allclose(A, _oracle_A(0.01, 4), atol=1e-10)


def test_gradients_vanish_for_presets():
    gpc = make_basis(2, 2)
    gx, gz = assemble_grad_A(build_preset("test1", 0.01).model, gpc, 0.7, 0.2)
    assert np.abs(gx).max() == 0 and np.abs(gz).max() == 0
    m2 = build_preset("test2", 0.01).model
    for x in (-0.5, 0.5):
        gx, gz = assemble_grad_A(m2, gpc, x, 0.3)
        assert np.abs(gx).max() == 0 and np.abs(gz).max() == 0


def test_linear_in_x_coefficient_gradient():
    c = 0.8

    def a2(x, z, y, r=0):
        x = np.asarray(x, dtype=float)[..., None]
        z = np.asarray(z, dtype=float)[..., None]
        return ((1 + x) * c) ** 2 + 0 * z + 0 * y[:, 0]

    def ga2(x, z, y, r=0):
        x = np.asarray(x, dtype=float)[..., None]
        return 2 * c * c * (1 + x) + 0 * y[:, 0], 0 * x + 0 * y[:, 0]

    model = CoefficientModel("lin", a2, ga2, (c, 3 * c))
    gpc = make_basis(2, 2)
    gx, gz = assemble_grad_A(model, gpc, 0.4, 0.1)
    np.testing.assert_allclose(gx, c * np.eye(gpc.size), atol=1e-13)
    np.testing.assert_allclose(gz, 0, atol=1e-14)


def test_gradient_matches_finite_differences():
    model = smooth_model()
    gpc = make_basis(2, 2)
    h = 1e-5
    for x, z in [(0.3, 0.2), (0.8, 0.6)]:
        gx, gz = assemble_grad_A(model, gpc, x, z)
        fx = (assemble_A(model, gpc, x + h, z) - assemble_A(model, gpc, x - h, z)) / (2 * h)
        fz = (assemble_A(model, gpc, x, z + h) - assemble_A(model, gpc, x, z - h)) / (2 * h)
        np.testing.assert_allclose(gx, fx, atol=1e-6)
        np.testing.assert_allclose(gz, fz, atol=1e-6)


@pytest.mark.parametrize("name,delta", [("test1", 0.01), ("test2", 0.01), ("test2", 0.3)])
def test_spd_and_symmetric(name, delta, rng):
    preset = build_preset(name, delta)
    gpc = make_basis(2, 4)
    lo, hi, zlo, zhi = preset.domain
    for _ in range(100):
        x, z = rng.uniform(lo, hi), rng.uniform(zlo, zhi)
        if preset.model.on_interface(x, z):
            continue
        A = assemble_A(preset.model, gpc, x, z)
        assert np.abs(A - A.T).max() <= 1e-13
        np.linalg.cholesky(A)


def test_quadrature_converged():
    model = build_preset("test1", 0.01).model
    A1 = assemble_A(model, make_basis(2, 4), 0.5, 0.5)
    A2 = assemble_A(model, make_basis(2, 4, quad_nodes=14), 0.5, 0.5)
    assert np.abs(A1 - A2).max() < 1e-11


def test_interface_requires_side():
    model = build_preset("test2", 0.01).model
    gpc = make_basis(2, 1)
    with pytest.raises(ValueError):
        assemble_A(model, gpc, 0.0, 0.3)
    Am = assemble_A(model, gpc, 0.0, 0.3, side="-")
    Ap = assemble_A(model, gpc, 0.0, 0.3, side="+")
    np.testing.assert_allclose(Am, assemble_A(model, gpc, -0.2, 0.3), atol=1e-14)
    np.testing.assert_allclose(Ap, assemble_A(model, gpc, 0.2, 0.3), atol=1e-14)
    assert np.abs(Am - Ap).max() > 1e-3


def test_preset_values():
    p = build_preset("test1", 0.0)
    y = np.array([[0.2, -0.4]])
    assert p.u(0.0, np.array(0.5), np.array(0.5), y)[0] == pytest.approx(1.0, abs=1e-15)
    p = build_preset("test1", 0.01)
    a2 = p.model.a_squared(np.array(0.3), np.array(0.4), np.array([[1.0, 1.0]]))[0]
    assert a2 == pytest.approx(2 / (2 * 1.01 ** 2), rel=1e-14)
    assert a2 == pytest.approx(0.9802960494069208, rel=1e-14)
    p = build_preset("test2", 0.0)
    t, x, z = 0.13, -0.37, 0.21
    expect = np.cos(3 * np.pi * t) * np.sin(3 * np.pi * x) * np.sin(3 * np.pi * z)
    got = p.u(t, np.array(x), np.array(z), y, p.region_of(x, z))[0]
    assert got == pytest.approx(expect, abs=1e-14)


@pytest.mark.parametrize("name", ["test1", "test2"])
def test_q_equals_a_grad_u(name, rng):
    p = build_preset(name, 0.01)
    y = rng.uniform(-1, 1, (4, 2))
    h = 1e-6
    for _ in range(5):
        x = rng.uniform(p.domain[0] + 0.01, p.domain[1] - 0.01)
        z = rng.uniform(p.domain[2], p.domain[3])
        if abs(x) < 0.01 and name == "test2":
            continue
        r = p.region_of(x, z)
        t = 0.1
        qx, qz = p.q(t, np.array(x), np.array(z), y, r)
        a = p.model.a(np.array(x), np.array(z), y, r)
        dux = (p.u(t, np.array(x + h), np.array(z), y, r) - p.u(t, np.array(x - h), np.array(z), y, r)) / (2 * h)
        duz = (p.u(t, np.array(x), np.array(z + h), y, r) - p.u(t, np.array(x), np.array(z - h), y, r)) / (2 * h)
        np.testing.assert_allclose(qx, a * dux, atol=1e-6)
        np.testing.assert_allclose(qz, a * duz, atol=1e-6)


def test_time_factor_consistent():
    for name in ("test1", "test2"):
        p = build_preset(name, 0.01)
        x, z = np.array([0.3, -0.4]), np.array([0.2, 0.6])
        y = np.array([[0.1, 0.5], [-0.3, 0.9]])
        r = p.region_of(x, z)
        np.testing.assert_allclose(p.u(0.37, x, z, y, r), p.time_factor(0.37) * p.u(0.0, x, z, y, r), atol=1e-14)


def test_build_preset_errors():
    with pytest.raises(ValueError):
        build_preset("test3", 0.01)
    with pytest.raises(ValueError):
        build_preset("test1", -0.1)
    with pytest.raises(ValueError):
        build_preset("test1", 1.0)


def test_perturbed_model():
    model = build_preset("test1", 0.01).model
    shifted = perturbed(model, 1e-3)
    x, z, y = np.array(0.4), np.array(0.2), np.array([[0.5, -0.5]])
    assert shifted.a_squared(x, z, y) - model.a_squared(x, z, y) == pytest.approx(1e-3, abs=1e-15)
    with pytest.raises(ValueError):
        perturbed(model, -10.0)
    assert perturbed(model, 0.0).a_squared(x, z, y) == model.a_squared(x, z, y)


def test_field_assembly_cellwise_and_pointwise():
    gpc = make_basis(2, 2)
    basis = LocalBasis(1)
    mesh = build_mesh((-1, 1, -1, 1), 4, 2, interface_x=(0.0,))
    field = assemble_field(build_preset("test2", 0.1).model, gpc, mesh, basis)
    assert field.cellwise_constant
    assert list(field.regions[:, 0]) == [0, 0, 1, 1]
    mesh = build_mesh((0, 1, 0, 1), 2, 2)
    field = assemble_field(smooth_model(), gpc, mesh, basis)
    assert not field.cellwise_constant
    X, Z = basis.quad_points(mesh)
    np.testing.assert_allclose(field.cell[1, 0, 1, 0], assemble_A(smooth_model(), gpc, X[1, 0, 1, 0], Z[1, 0, 1, 0]),
                               atol=1e-14)
    with pytest.raises(ValueError):
        assemble_field(build_preset("test2", 0.1).model, gpc, build_mesh((-1, 1, -1, 1), 3, 3), basis)
