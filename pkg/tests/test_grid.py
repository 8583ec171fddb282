"""Tests for the finite-difference grid layer."""
import numpy as np
import pytest

from curvsolve import grid
from curvsolve.grid import Domain2D, ScalarField


def unit_domain(nx=15, ny=15, bdata=lambda x, y: 0.0 * x):
    return Domain2D((0.0, 1.0), (0.0, 1.0), nx, ny, bdata)


class TestDomain:
    def test_spacing(self):
        d = unit_domain(15, 31)
        assert d.hx == pytest.approx(1.0 / 16)
        assert d.hy == pytest.approx(1.0 / 32)
        assert d.xs[0] == 0.0 and d.xs[-1] == 1.0

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            unit_domain(7, 15)

    def test_degenerate_range(self):
        with pytest.raises(ValueError):
            Domain2D((1.0, 1.0), (0.0, 1.0), 8, 8, lambda x, y: 0.0 * x)


class TestDifferentiate:
    def test_affine_exact(self):
        f = ScalarField.from_function(unit_domain(), lambda x, y: x)
        g, h = grid.differentiate(f, 4, 9)
        assert np.array_equal(g, [1.0, 0.0])
        assert np.all(h == 0.0)

    def test_quadratic_exact(self):
        f = ScalarField.from_function(unit_domain(), lambda x, y: x**2)
        _, h = grid.differentiate(f, 3, 3)
        assert h[0, 0] == pytest.approx(2.0, rel=1e-12)

    def test_cross_term_exact(self):
        f = ScalarField.from_function(unit_domain(), lambda x, y: x * y)
        g, h = grid.differentiate(f, 5, 6)
        assert h[0, 1] == pytest.approx(1.0, rel=1e-12)

    def test_refinement_order(self):
        errs = []
        for nx in (15, 31):
            f = ScalarField.from_function(unit_domain(nx, nx), lambda x, y: np.sin(x))
            i = (nx + 1) // 2
            _, h = grid.differentiate(f, i, i)
            x = f.domain.xs[i]
            errs.append(abs(h[0, 0] + np.sin(x)))
        assert errs[0] / errs[1] >= 3.8

    def test_boundary_node_rejected(self):
        f = ScalarField.from_function(unit_domain(), lambda x, y: x)
        with pytest.raises(ValueError):
            grid.differentiate(f, 0, 4)
        with pytest.raises(ValueError):
            grid.differentiate(f, 16, 4)

    def test_batched_matches_pointwise(self):
        rng = np.random.default_rng(3)
        d = unit_domain(9, 12)
        f = ScalarField(d, rng.standard_normal((11, 14)))
        du, d2u = grid.interior_derivatives(f)
        for i in range(1, d.nx + 1):
            for j in range(1, d.ny + 1):
                g, h = grid.differentiate(f, i, j)
                assert np.array_equal(du[i - 1, j - 1], g)
                assert np.array_equal(d2u[i - 1, j - 1], h)

    def test_linearity(self):
        rng = np.random.default_rng(9)
        d = unit_domain(9, 9)
        a = rng.standard_normal((11, 11))
        b = rng.standard_normal((11, 11))
        dua, _ = grid.interior_derivatives(ScalarField(d, a))
        dub, _ = grid.interior_derivatives(ScalarField(d, b))
        duc, _ = grid.interior_derivatives(ScalarField(d, 2.0 * a + 3.0 * b))
        assert np.allclose(duc, 2.0 * dua + 3.0 * dub, atol=1e-12)


class TestRefine:
    def test_affine_preserved(self):
        fn = lambda x, y: 1.0 + 2.0 * x - y
        f = ScalarField.from_function(unit_domain(bdata=fn), fn)
        r = grid.refine(f)
        X, Y = r.domain.lattice()
        assert np.allclose(r.values, fn(X, Y), atol=1e-14)

    def test_constant_preserved(self):
        fn = lambda x, y: 3.0 + 0.0 * x
        f = ScalarField.from_function(unit_domain(bdata=fn), fn)
        assert np.allclose(grid.refine(f).values, 3.0)

    def test_quadratic_midpoint_error_bound(self):
        # bilinear interpolation of x^2 errs by exactly h^2/4 at midpoints
        fn = lambda x, y: x**2
        d = unit_domain(bdata=fn)
        f = ScalarField.from_function(d, fn)
        r = grid.refine(f)
        X, Y = r.domain.lattice()
        err = np.abs(r.values - fn(X, Y))[1:-1, 1:-1]
        assert err.max() == pytest.approx(d.hx**2 / 4.0, rel=1e-10)

    def test_boundary_resampled_not_interpolated(self):
        fn = lambda x, y: np.sin(3 * x) + y
        d = unit_domain(bdata=fn)
        f = ScalarField.from_function(d, lambda x, y: 0.0 * x).with_boundary(
            d.sample_boundary()
        )
        r = grid.refine(f)
        X, Y = r.domain.lattice()
        assert np.allclose(r.values[0, :], fn(X, Y)[0, :], atol=1e-14)
        assert np.allclose(r.values[:, -1], fn(X, Y)[:, -1], atol=1e-14)

    def test_node_coincidence(self):
        rng = np.random.default_rng(1)
        d = unit_domain(8, 8)
        f = ScalarField(d, rng.standard_normal((10, 10)))
        r = grid.refine(f)
        assert np.array_equal(r.values[2:-2:2, 2:-2:2], f.values[1:-1, 1:-1])


class TestCsv:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(7)
        d = unit_domain(8, 9)
        f = ScalarField(d, rng.standard_normal((10, 11)))
        path = tmp_path / "field.csv"
        grid.write_csv(f, path)
        xs, ys, vals = grid.read_csv(path)
        assert np.array_equal(vals, f.values)
        assert np.array_equal(xs, d.xs)

    def test_header_checked(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            grid.read_csv(p)
