"""Rectangular finite-difference grids: fields, stencils, refinement, CSV I/O.

The PDE grid is two-dimensional.  A field stores the full (nx+2) x (ny+2)
lattice including the Dirichlet boundary ring; all differencing is centered
second order and only ever evaluated at strictly interior nodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Domain2D:
    """Coordinate rectangle with interior node counts and boundary data."""

    x_range: tuple
    y_range: tuple
    nx: int
    ny: int
    boundary_data: Callable

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ValueError("need at least 8 interior points per side")
        if not (self.x_range[1] > self.x_range[0] and self.y_range[1] > self.y_range[0]):
            raise ValueError("ranges must be increasing intervals")

    @property
    def hx(self):
        return (self.x_range[1] - self.x_range[0]) / (self.nx + 1)

    @property
    def hy(self):
        return (self.y_range[1] - self.y_range[0]) / (self.ny + 1)

    @property
    def xs(self):
        return self.x_range[0] + self.hx * np.arange(self.nx + 2)

    @property
    def ys(self):
        return self.y_range[0] + self.hy * np.arange(self.ny + 2)

    def lattice(self):
        """Full-lattice coordinate arrays X, Y of shape (nx+2, ny+2)."""
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def interior_points(self):
        """Interior node coordinates, shape (nx, ny, 2)."""
        X, Y = self.lattice()
        return np.stack([X[1:-1, 1:-1], Y[1:-1, 1:-1]], axis=-1)

    def boundary_mask(self):
        m = np.zeros((self.nx + 2, self.ny + 2), dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m

    def sample_boundary(self):
        """Boundary data on the full lattice (interior entries are unused)."""
        X, Y = self.lattice()
        return np.asarray(self.boundary_data(X, Y), dtype=float)


@dataclass
class ScalarField:
    """Grid-sampled scalar with value semantics (copy before mutating)."""

    domain: Domain2D
    values: np.ndarray

    def __post_init__(self):
        expect = (self.domain.nx + 2, self.domain.ny + 2)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != expect:
            raise ValueError(f"values must have shape {expect}, got {self.values.shape}")

    @classmethod
    def from_function(cls, domain, fn):
        X, Y = domain.lattice()
        return cls(domain, np.asarray(fn(X, Y), dtype=float) * np.ones_like(X))

    @classmethod
    def constant(cls, domain, value=0.0):
        return cls(domain, np.full((domain.nx + 2, domain.ny + 2), float(value)))

    def copy(self):
        return ScalarField(self.domain, self.values.copy())

    @property
    def interior(self):
        return self.values[1:-1, 1:-1]

    def with_boundary(self, ring_values):
        """Copy of the field with the boundary ring replaced."""
        out = self.copy()
        mask = self.domain.boundary_mask()
        out.values[mask] = np.asarray(ring_values, dtype=float)[mask]
        return out

    def with_dirichlet_boundary(self):
        """Copy with the ring reset to the domain's boundary data."""
        return self.with_boundary(self.domain.sample_boundary())


def differentiate(field, i, j):
    """Gradient and coordinate Hessian at interior lattice node (i, j).

    Centered second-order stencils; the cross derivative uses the 4-point
    stencil.  Exact on polynomials of degree <= 2.
    """
    d = field.domain
    if not (1 <= i <= d.nx and 1 <= j <= d.ny):
        raise ValueError(f"node ({i}, {j}) is not strictly interior")
    v = field.values
    hx, hy = d.hx, d.hy
    ux = (v[i + 1, j] - v[i - 1, j]) / (2.0 * hx)
    uy = (v[i, j + 1] - v[i, j - 1]) / (2.0 * hy)
    uxx = (v[i + 1, j] - 2.0 * v[i, j] + v[i - 1, j]) / hx**2
    uyy = (v[i, j + 1] - 2.0 * v[i, j] + v[i, j - 1]) / hy**2
    uxy = (v[i + 1, j + 1] - v[i + 1, j - 1] - v[i - 1, j + 1] + v[i - 1, j - 1]) / (
        4.0 * hx * hy
    )
    return np.array([ux, uy]), np.array([[uxx, uxy], [uxy, uyy]])


def interior_derivatives(field):
    """Gradients (nx, ny, 2) and Hessians (nx, ny, 2, 2) at all interior nodes.

    Same arithmetic as ``differentiate``, vectorized over the grid.
    """
    d = field.domain
    v = field.values
    hx, hy = d.hx, d.hy
    ux = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * hx)
    uy = (v[1:-1, 2:] - v[1:-1, :-2]) / (2.0 * hy)
    uxx = (v[2:, 1:-1] - 2.0 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / hx**2
    uyy = (v[1:-1, 2:] - 2.0 * v[1:-1, 1:-1] + v[1:-1, :-2]) / hy**2
    uxy = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4.0 * hx * hy)
    du = np.stack([ux, uy], axis=-1)
    d2u = np.empty(ux.shape + (2, 2))
    d2u[..., 0, 0] = uxx
    d2u[..., 0, 1] = uxy
    d2u[..., 1, 0] = uxy
    d2u[..., 1, 1] = uyy
    return du, d2u


def refine(field):
    """Bilinear interpolation onto the spacing-halved grid.

    Old nodes are preserved exactly; the boundary ring of the refined field
    is re-sampled from the domain's boundary data, not interpolated.
    """
    d = field.domain
    fine = Domain2D(d.x_range, d.y_range, 2 * d.nx + 1, 2 * d.ny + 1, d.boundary_data)
    v = field.values
    out = np.empty((fine.nx + 2, fine.ny + 2))
    out[::2, ::2] = v
    out[1::2, ::2] = 0.5 * (v[:-1, :] + v[1:, :])
    out[::2, 1::2] = 0.5 * (v[:, :-1] + v[:, 1:])
    out[1::2, 1::2] = 0.25 * (v[:-1, :-1] + v[1:, :-1] + v[:-1, 1:] + v[1:, 1:])
    result = ScalarField(fine, out)
    return result.with_dirichlet_boundary()


def write_csv(field, path):
    """Dump the full lattice as ``x,y,u`` rows (row-major, round-trip floats)."""
    d = field.domain
    xs, ys = d.xs, d.ys
    v = field.values
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,u\n")
        for i in range(d.nx + 2):
            for j in range(d.ny + 2):
                fh.write(f"{float(xs[i])!r},{float(ys[j])!r},{float(v[i, j])!r}\n")


def read_csv(path):
    """Inverse of write_csv: returns (xs, ys, values)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "x,y,u":
            raise ValueError(f"unexpected CSV header {header!r}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    xs = sorted({float(r[0]) for r in rows})
    ys = sorted({float(r[1]) for r in rows})
    values = np.empty((len(xs), len(ys)))
    ix = {x: i for i, x in enumerate(xs)}
    iy = {y: j for j, y in enumerate(ys)}
    for r in rows:
        values[ix[float(r[0])], iy[float(r[1])]] = float(r[2])
    return np.array(xs), np.array(ys), values
