"""Tests for graph geometry and the flat-ambient identity validation."""
import numpy as np
import pytest

from curvsolve import geometry
from curvsolve.geometry import MetricField
from curvsolve.grid import Domain2D, ScalarField


def conformal_x1(n=2):
    # omega(x) = x^1
    return MetricField.conformal(
        n,
        omega=lambda x: x[..., 0],
        omega_grad=lambda x: np.stack(
            [np.ones_like(x[..., 0])] + [np.zeros_like(x[..., 0])] * (n - 1), axis=-1
        ),
    )


class TestChristoffels:
    def test_flat_zero(self):
        m = MetricField.flat(3)
        assert np.all(geometry.christoffels(m, np.array([0.3, -1.0, 2.0])) == 0.0)

    def test_conformal_linear_omega(self):
        m = conformal_x1()
        g = geometry.christoffels(m, np.array([0.2, 0.7]))
        # Gamma[k, i, j]
        assert g[0, 0, 0] == pytest.approx(1.0)
        assert g[0, 1, 1] == pytest.approx(-1.0)
        assert g[1, 0, 1] == pytest.approx(1.0)
        assert g[1, 1, 0] == pytest.approx(1.0)
        assert g[0, 0, 1] == g[0, 1, 0] == 0.0
        assert g[1, 0, 0] == g[1, 1, 1] == 0.0

    def test_constant_omega_zero(self):
        m = MetricField.conformal(
            2,
            omega=lambda x: 0.7 * np.ones_like(x[..., 0]),
            omega_grad=lambda x: np.zeros_like(x),
        )
        assert np.all(geometry.christoffels(m, np.array([1.0, 2.0])) == 0.0)

    def test_symmetry_in_lower_indices(self):
        m = MetricField.conformal(
            3,
            omega=lambda x: np.sin(x[..., 0]) * x[..., 1] + x[..., 2] ** 2,
            omega_grad=lambda x: np.stack(
                [
                    np.cos(x[..., 0]) * x[..., 1],
                    np.sin(x[..., 0]),
                    2.0 * x[..., 2],
                ],
                axis=-1,
            ),
        )
        g = geometry.christoffels(m, np.array([0.4, -0.3, 0.9]))
        assert np.allclose(g, np.swapaxes(g, 1, 2))


class TestCovariantHessian:
    def test_flat_identity(self):
        m = MetricField.flat(2)
        d2u = np.array([[1.0, 0.5], [0.5, -2.0]])
        out = geometry.covariant_hessian(m, np.array([3.0, 1.0]), d2u, np.zeros(2))
        assert np.array_equal(out, d2u)

    def test_conformal_correction(self):
        m = conformal_x1()
        out = geometry.covariant_hessian(
            m, np.array([1.0, 0.0]), np.zeros((2, 2)), np.array([0.1, 0.2])
        )
        assert out[0, 0] == pytest.approx(-1.0)
        assert out[1, 1] == pytest.approx(1.0)
        assert out[0, 1] == pytest.approx(0.0)

    def test_constant_function(self):
        m = conformal_x1()
        out = geometry.covariant_hessian(
            m, np.zeros(2), np.zeros((2, 2)), np.array([0.5, 0.5])
        )
        assert np.all(out == 0.0)


class TestGraphPointGeometry:
    def test_zero_gradient_weingarten_is_hessian(self):
        m = MetricField.flat(2)
        pg = geometry.graph_point_geometry(
            m, np.zeros(2), np.diag([2.0, 3.0]), np.zeros(2)
        )
        assert pg.W == 1.0
        assert np.allclose(pg.kappa, [2.0, 3.0])
        assert np.array_equal(pg.A, np.diag([2.0, 3.0]))

    def test_tilted_graph(self):
        m = MetricField.flat(2)
        pg = geometry.graph_point_geometry(
            m, np.array([1.0, 0.0]), np.diag([1.0, 0.0]), np.zeros(2)
        )
        assert pg.W == pytest.approx(np.sqrt(2.0))
        assert np.allclose(pg.kappa, [0.0, 1.0 / (2.0 * np.sqrt(2.0))])

    def test_semicircle_curvature_sign(self):
        # u(x) = -sqrt(R^2 - x^2): the convex branch must have kappa = +1/R
        R = 2.0
        m = MetricField.flat(1)
        for x in (0.0, 0.5, 1.2):
            du = np.array([x / np.sqrt(R**2 - x**2)])
            d2u = np.array([[R**2 / (R**2 - x**2) ** 1.5]])
            pg = geometry.graph_point_geometry(m, du, d2u, np.array([x]))
            assert pg.kappa[0] == pytest.approx(1.0 / R, rel=1e-12)

    def test_metric_inverse_consistency(self):
        rng = np.random.default_rng(5)
        m = MetricField.flat(3)
        for _ in range(50):
            du = rng.standard_normal(3)
            h = rng.standard_normal((3, 3))
            pg = geometry.graph_point_geometry(m, du, h + h.T, np.zeros(3))
            assert np.allclose(pg.g_inv @ pg.g, np.eye(3), atol=1e-12)
            assert pg.W >= 1.0

    def test_eigenvalues_match_weingarten(self):
        # kappa from the symmetric conjugation equals eig(g^{-1} a)
        rng = np.random.default_rng(11)
        m = MetricField.flat(3)
        for _ in range(50):
            du = rng.standard_normal(3)
            h = rng.standard_normal((3, 3))
            pg = geometry.graph_point_geometry(m, du, h + h.T, np.zeros(3))
            ev = np.sort(np.linalg.eigvals(pg.A).real)
            assert np.allclose(pg.kappa, ev, atol=1e-10)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(13)
        m = MetricField.flat(2)
        du = np.array([0.6, -0.4])
        h0 = np.array([[1.2, 0.3], [0.3, 0.8]])
        base = geometry.graph_point_geometry(m, du, h0, np.zeros(2)).kappa
        for _ in range(20):
            q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
            rotated = geometry.graph_point_geometry(
                m, q @ du, q @ h0 @ q.T, np.zeros(2)
            ).kappa
            assert np.allclose(rotated, base, atol=1e-10)

    def test_conformal_metric_kappa(self):
        # constant omega = log(c)/2 scales the metric by c; with du = 0 the
        # curvatures are the sigma-eigenvalues of the Hessian: d2u / c
        c = 4.0
        m = MetricField.conformal(
            2,
            omega=lambda x: 0.5 * np.log(c) * np.ones_like(x[..., 0]),
            omega_grad=lambda x: np.zeros_like(x),
        )
        pg = geometry.graph_point_geometry(
            m, np.zeros(2), np.diag([2.0, 3.0]), np.zeros(2)
        )
        assert np.allclose(pg.kappa, [0.5, 0.75])

    def test_nonfinite_rejected(self):
        m = MetricField.flat(2)
        with pytest.raises(ValueError):
            geometry.graph_point_geometry(
                m, np.array([np.nan, 0.0]), np.eye(2), np.zeros(2)
            )


def make_field(fn, nx):
    dom = Domain2D((0.0, 1.0), (0.0, 1.0), nx, nx, fn)
    return ScalarField.from_function(dom, fn)


class TestIdentityValidation:
    def test_gauss_at_origin_paraboloid(self):
        nx = 31
        dom = Domain2D((-0.5, 0.5), (-0.5, 0.5), nx, nx, lambda x, y: (x**2 + y**2) / 2)
        f = ScalarField.from_function(dom, lambda x, y: (x**2 + y**2) / 2)
        rp = geometry.induced_curvature(f)
        center = (nx + 1) // 2
        # a = identity at the origin, so the Gauss identity pins R'_1212 = 1;
        # the metric-differencing route reproduces it to O(h^2)
        assert rp[center, center, 0, 1, 0, 1] == pytest.approx(1.0, abs=2 * dom.hx**2)

    def test_linear_graph_residuals_vanish(self):
        f = make_field(lambda x, y: 0.3 * x - 0.2 * y + 1.0, 31)
        rep = geometry.validate_gauss_codazzi_simons(f)
        assert rep.gauss_max <= 1e-12
        assert rep.codazzi_max <= 1e-10
        assert rep.simons_max <= 1e-9

    def test_refinement_decay(self):
        fn = lambda x, y: x**2 * y
        maxima = []
        for nx in (32, 64):
            rep = geometry.validate_gauss_codazzi_simons(make_field(fn, nx))
            maxima.append((rep.gauss_max, rep.codazzi_max, rep.simons_max))
        for coarse, fine in zip(maxima[0], maxima[1]):
            assert coarse / fine >= 3.0

    def test_small_grid_rejected(self):
        with pytest.raises(ValueError):
            Domain2D((0, 1), (0, 1), 4, 4, lambda x, y: x)
