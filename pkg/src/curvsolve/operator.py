"""The curvature operator G(grad u, Hess u) and its Newton linearization.

G composes the per-point graph geometry with the symmetric curvature
function: G = f(kappa) where kappa are the eigenvalues of the Weingarten
matrix built from the gradient and the covariant Hessian.  The derivative
in the Hessian slot is reconstructed in the eigenframe (conjugate the
diagonal gradient of f back through the symmetrized shape matrix); the
derivative in the gradient slot uses the closed form

    G^i = -(1/W) G^{rs} a_rs u^i - W G^{ij} a_j^l u_l - W G^{lj} a_l^i u_j

with indices raised by the ambient metric.  Both are cross-checked against
finite differences in the test suite, including on conformal metrics.

All grid evaluation is vectorized over interior nodes; the scalar entry
points run the same kernels on degenerate batches, so a per-node loop of
``evaluate_G`` reproduces the assembled residual exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse

from . import symfun
from .errors import ConeViolationError
from .geometry import christoffels, graph_geometry_arrays
from .grid import interior_derivatives


@dataclass(frozen=True)
class OperatorContext:
    """Problem data: curvature function, ambient metric, right-hand side.

    ``psi(x, u)`` and its u-derivative ``psi_t(x, u)`` must accept points of
    shape (..., 2) with matching u of shape (...); Psi must be positive and
    nondecreasing in u wherever the solver samples it.
    """

    spec: symfun.CurvatureSpec
    metric: "object"
    psi: Callable
    psi_t: Callable


@dataclass
class LinearizedSystem:
    """Sparse Newton system over interior nodes plus per-node coefficients."""

    matrix: scipy.sparse.csr_matrix
    rhs: np.ndarray
    coeff_second: np.ndarray
    coeff_first: np.ndarray
    kappa: np.ndarray


class GridState:
    """Per-interior-node geometry of an iterate (plain attribute bundle)."""

    __slots__ = ("points", "du", "cov_hess", "conf", "geo", "kappa", "gamma")

    def __init__(self, points, du, cov_hess, conf, geo, kappa, gamma):
        self.points = points
        self.du = du
        self.cov_hess = cov_hess
        self.conf = conf
        self.geo = geo
        self.kappa = kappa
        self.gamma = gamma


def grid_state(ctx, field):
    """Geometry arrays of the iterate at every interior node."""
    dom = field.domain
    pts = dom.interior_points()
    du, d2u = interior_derivatives(field)
    if ctx.metric.is_flat:
        gamma = None
        cov = d2u
    else:
        gamma = christoffels(ctx.metric, pts)
        cov = d2u - np.einsum("...kij,...k->...ij", gamma, du)
    conf = ctx.metric.conformal_factor(pts)
    geo = graph_geometry_arrays(conf, du, cov)
    return GridState(pts, du, cov, conf, geo, geo["kappa"], gamma)


def first_cone_violation(ctx, kappa):
    """(lattice_i, lattice_j, order, value) of the first bad node, or None."""
    margins = symfun.cone_margins(ctx.spec, kappa)
    bad = ~np.all(margins > 0.0, axis=-1)
    if not np.any(bad):
        return None
    i, j = np.argwhere(bad)[0]
    m = margins[i, j]
    order = int(np.argmax(~(m > 0.0))) + 1
    return int(i) + 1, int(j) + 1, order, float(m[order - 1])


def admissible(ctx, field):
    """True when kappa lies in the cone at every interior node."""
    state = grid_state(ctx, field)
    return first_cone_violation(ctx, state.kappa) is None


def evaluate_G(ctx, du, cov_hess, x):
    """Operator value at a single point; raises outside the cone."""
    conf = ctx.metric.conformal_factor(np.asarray(x, dtype=float))
    geo = graph_geometry_arrays(conf, np.asarray(du, dtype=float), np.asarray(cov_hess, dtype=float))
    return float(symfun.evaluate(ctx.spec, geo["kappa"], location=tuple(np.asarray(x).tolist())))


def _coefficient_arrays(geo, f_grad, conf):
    """G^{ij} and G^i from the eigenframe data, batched."""
    W = geo["W"]
    P = geo["P"]
    Q = geo["Q"]
    a = geo["a"]
    g_inv = geo["g_inv"]
    kappa = geo["kappa"]
    M = np.einsum("...ik,...k,...jk->...ij", Q, f_grad, Q)
    Fij = P @ M @ P
    Gij = Fij / W[..., None, None]
    du_low = geo["du_low"]
    u_up = du_low / conf[..., None]
    A_mix = g_inv @ a  # A_mix[..., l, j] = a_j^l
    trace_fk = np.einsum("...k,...k->...", f_grad, kappa)
    term1 = -(trace_fk / W**2)[..., None] * u_up
    a_dot_u = np.einsum("...lj,...l->...j", A_mix, du_low)
    term2 = -W[..., None] * np.einsum("...ij,...j->...i", Gij, a_dot_u)
    g_dot_u = np.einsum("...lj,...j->...l", Gij, du_low)
    term3 = -W[..., None] * np.einsum("...il,...l->...i", A_mix, g_dot_u)
    return Gij, term1 + term2 + term3


def coefficients(ctx, du, cov_hess, x):
    """(G^{ij}, G^i) at a single admissible point."""
    du = np.asarray(du, dtype=float)
    conf = ctx.metric.conformal_factor(np.asarray(x, dtype=float))
    geo = graph_geometry_arrays(conf, du, np.asarray(cov_hess, dtype=float))
    geo["du_low"] = du
    _, f_grad = symfun.value_and_gradient(ctx.spec, geo["kappa"])
    return _coefficient_arrays(geo, f_grad, conf)


def operator_values(ctx, field):
    """G at every interior node of the iterate; raises on cone exit."""
    state = grid_state(ctx, field)
    hit = first_cone_violation(ctx, state.kappa)
    if hit is not None:
        i, j, order, value = hit
        raise ConeViolationError(order, value, (i, j))
    return symfun.evaluate(ctx.spec, state.kappa)


def homotopy_rhs(ctx, points, u_interior, t, f_chi0_interior):
    """t Psi(x, u) + (1 - t) F[chi0], the continuation right-hand side."""
    psi = np.asarray(ctx.psi(points, u_interior), dtype=float)
    return t * psi + (1.0 - t) * f_chi0_interior


def try_residual(ctx, field, t, f_chi0_interior):
    """Residual of the continuation problem, or None when inadmissible."""
    state = grid_state(ctx, field)
    if first_cone_violation(ctx, state.kappa) is not None:
        return None
    val = symfun.evaluate(ctx.spec, state.kappa)
    return val - homotopy_rhs(ctx, state.points, field.interior, t, f_chi0_interior)


def assemble(ctx, field, t, f_chi0_interior):
    """Residual and 9-point sparse Jacobian of the continuation problem.

    Dirichlet boundary values live in the field's ring; their columns are
    eliminated (the correction is zero there), which folds them into the
    right-hand side.
    """
    dom = field.domain
    state = grid_state(ctx, field)
    hit = first_cone_violation(ctx, state.kappa)
    if hit is not None:
        i, j, order, value = hit
        raise ConeViolationError(order, value, (i, j))
    val, f_grad = symfun.value_and_gradient(ctx.spec, state.kappa)
    residual = val - homotopy_rhs(ctx, state.points, field.interior, t, f_chi0_interior)

    geo = dict(state.geo)
    geo["du_low"] = state.du
    Gij, Gi = _coefficient_arrays(geo, f_grad, state.conf)
    grad_coeff = Gi
    if state.gamma is not None:
        # covariant Hessian depends on the gradient through the Christoffels
        grad_coeff = Gi - np.einsum("...ij,...mij->...m", Gij, state.gamma)
    psi_t = np.asarray(ctx.psi_t(state.points, field.interior), dtype=float)

    nx, ny = dom.nx, dom.ny
    hx, hy = dom.hx, dom.hy
    gxx = Gij[..., 0, 0]
    gyy = Gij[..., 1, 1]
    gxy = Gij[..., 0, 1]
    cx = grad_coeff[..., 0]
    cy = grad_coeff[..., 1]

    stencil = {
        (0, 0): -2.0 * gxx / hx**2 - 2.0 * gyy / hy**2 - t * psi_t,
        (1, 0): gxx / hx**2 + cx / (2.0 * hx),
        (-1, 0): gxx / hx**2 - cx / (2.0 * hx),
        (0, 1): gyy / hy**2 + cy / (2.0 * hy),
        (0, -1): gyy / hy**2 - cy / (2.0 * hy),
        (1, 1): 2.0 * gxy / (4.0 * hx * hy),
        (-1, -1): 2.0 * gxy / (4.0 * hx * hy),
        (1, -1): -2.0 * gxy / (4.0 * hx * hy),
        (-1, 1): -2.0 * gxy / (4.0 * hx * hy),
    }

    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    rows_base = (ii * ny + jj).ravel()
    rows = []
    cols = []
    data = []
    for (dx, dy), coeff in stencil.items():
        ni = ii + dx
        nj = jj + dy
        keep = ((ni >= 0) & (ni < nx) & (nj >= 0) & (nj < ny)).ravel()
        rows.append(rows_base[keep])
        cols.append((ni * ny + nj).ravel()[keep])
        data.append(coeff.ravel()[keep])
    matrix = scipy.sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nx * ny, nx * ny),
    ).tocsr()
    return LinearizedSystem(
        matrix=matrix,
        rhs=residual.ravel(),
        coeff_second=Gij,
        coeff_first=Gi,
        kappa=state.kappa,
    )
