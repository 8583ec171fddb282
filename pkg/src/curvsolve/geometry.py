"""Graph-hypersurface geometry over flat and conformally flat metrics.

Per-point quantities for the graph of u: the tilt factor W, induced metric,
second fundamental form, Weingarten matrix and principal curvatures; plus a
finite-difference validation of the Gauss, Codazzi and Simons identities on
flat ambient grids.

The ambient metric is sigma_ij = e^{2 omega} delta_ij (flat when omega is
absent).  Principal curvatures are computed by conjugating the covariant
second fundamental form with the symmetric square root of the inverse
induced metric, which keeps the eigenproblem symmetric; they are returned
sorted ascending.  The orientation is the one whose normal has a positive
product-factor component, so convex graphs have positive curvatures (pinned
by the one-dimensional lower semicircle, whose curvature is +1/R).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import interior_derivatives


@dataclass(frozen=True)
class MetricField:
    """Ambient metric e^{2 omega} delta_ij with analytic omega derivatives.

    ``omega``/``omega_grad``/``omega_hess`` take points of shape (..., n) and
    return shapes (...), (..., n) and (..., n, n); all must broadcast.  A
    flat metric has no omega.
    """

    n: int
    omega: Callable | None = None
    omega_grad: Callable | None = None
    omega_hess: Callable | None = None

    @classmethod
    def flat(cls, n):
        return cls(n)

    @classmethod
    def conformal(cls, n, omega, omega_grad, omega_hess=None):
        return cls(n, omega, omega_grad, omega_hess)

    @property
    def is_flat(self):
        return self.omega is None

    def conformal_factor(self, x):
        """e^{2 omega(x)}, shape (...) for x of shape (..., n)."""
        x = np.asarray(x, dtype=float)
        if self.is_flat:
            return np.ones(x.shape[:-1])
        return np.exp(2.0 * np.asarray(self.omega(x), dtype=float))

    def sigma(self, x):
        x = np.asarray(x, dtype=float)
        return self.conformal_factor(x)[..., None, None] * np.eye(self.n)

    def sigma_inv(self, x):
        x = np.asarray(x, dtype=float)
        return np.eye(self.n) / self.conformal_factor(x)[..., None, None]


def christoffels(metric, x):
    """Christoffel symbols Gamma^k_ij at x, shape (..., n, n, n) (k first).

    Flat metrics give zeros; conformal metrics use
    Gamma^k_ij = delta_ik w_j + delta_jk w_i - delta_ij w_k with w = grad
    omega (indices moved with the Euclidean metric).
    """
    x = np.asarray(x, dtype=float)
    n = metric.n
    batch = x.shape[:-1]
    if metric.is_flat:
        return np.zeros(batch + (n, n, n))
    w = np.asarray(metric.omega_grad(x), dtype=float) * np.ones(batch + (n,))
    eye = np.eye(n)
    gamma = (
        np.einsum("ik,...j->...kij", eye, w)
        + np.einsum("jk,...i->...kij", eye, w)
        - np.einsum("ij,...k->...kij", eye, w)
    )
    return gamma


def covariant_hessian(metric, du, d2u, x):
    """u_{i;j} = d2u_ij - Gamma^k_ij du_k for batched inputs."""
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    if metric.is_flat:
        return d2u
    gamma = christoffels(metric, x)
    return d2u - np.einsum("...kij,...k->...ij", gamma, du)


@dataclass(frozen=True)
class PointGeometry:
    """Per-point graph data: tilt, metrics, curvature tensors, eigenvalues."""

    W: float
    g: np.ndarray
    g_inv: np.ndarray
    a: np.ndarray
    A: np.ndarray
    kappa: np.ndarray


def graph_geometry_arrays(conformal_factor, du, cov_hess):
    """Batched graph geometry from the conformal factor and u derivatives.

    Returns a dict with W, g, g_inv, its symmetric square root P, the
    covariant second fundamental form a, the mixed Weingarten matrix A
    (A[..., l, j] = a_j^l), the symmetrized shape matrix S = P a P, and its
    eigen-decomposition (kappa ascending, Q orthonormal columns).
    """
    conf = np.asarray(conformal_factor, dtype=float)
    du = np.asarray(du, dtype=float)
    cov_hess = np.asarray(cov_hess, dtype=float)
    if not (np.all(np.isfinite(du)) and np.all(np.isfinite(cov_hess))):
        raise ValueError("non-finite gradient or Hessian input")
    n = du.shape[-1]
    eye = np.eye(n)
    outer = du[..., :, None] * du[..., None, :]
    grad_sq = np.sum(du * du, axis=-1) / conf
    W = np.sqrt(1.0 + grad_sq)
    g = conf[..., None, None] * eye + outer
    g_inv = (eye - outer / (conf * W**2)[..., None, None]) / conf[..., None, None]
    # symmetric square root of g_inv: rank-one update along the gradient
    norm = np.sqrt(np.sum(du * du, axis=-1))
    safe = np.where(norm > 0.0, norm, 1.0)
    what = du / safe[..., None]
    P = (eye - (1.0 - 1.0 / W)[..., None, None] * (what[..., :, None] * what[..., None, :])) / np.sqrt(
        conf
    )[..., None, None]
    a = cov_hess / W[..., None, None]
    A = g_inv @ a
    S = P @ a @ P
    kappa, Q = np.linalg.eigh(S)
    return {
        "W": W,
        "g": g,
        "g_inv": g_inv,
        "P": P,
        "a": a,
        "A": A,
        "S": S,
        "kappa": kappa,
        "Q": Q,
    }


def graph_point_geometry(metric, du, cov_hess, x):
    """PointGeometry of the graph of u at a single point."""
    conf = metric.conformal_factor(np.asarray(x, dtype=float))
    arrs = graph_geometry_arrays(conf, du, cov_hess)
    return PointGeometry(
        W=float(arrs["W"]),
        g=arrs["g"],
        g_inv=arrs["g_inv"],
        a=arrs["a"],
        A=arrs["A"],
        kappa=arrs["kappa"],
    )


# ---------------------------------------------------------------------------
# Finite-difference validation of the structure identities (flat ambient)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityResiduals:
    """Max/mean residuals of the Gauss, Codazzi and Simons identities."""

    gauss_max: float
    gauss_mean: float
    codazzi_max: float
    codazzi_mean: float
    simons_max: float
    simons_mean: float
    spacing: float
    points: int

    def as_dict(self):
        return {
            "gauss_max": self.gauss_max,
            "gauss_mean": self.gauss_mean,
            "codazzi_max": self.codazzi_max,
            "codazzi_mean": self.codazzi_mean,
            "simons_max": self.simons_max,
            "simons_mean": self.simons_mean,
            "spacing": self.spacing,
            "points": self.points,
        }


def _dx(F, hx):
    out = np.full_like(F, np.nan)
    out[1:-1, :] = (F[2:, :] - F[:-2, :]) / (2.0 * hx)
    return out


def _dy(F, hy):
    out = np.full_like(F, np.nan)
    out[:, 1:-1] = (F[:, 2:] - F[:, :-2]) / (2.0 * hy)
    return out


def _partial(F, axis, h):
    return _dx(F, h) if axis == 0 else _dy(F, h)


def _graph_fd_fields(field):
    """Lattice-shaped du, a, g, g_inv fields of the graph (NaN-padded edges)."""
    d = field.domain
    v = field.values
    hx, hy = d.hx, d.hy
    shape = v.shape
    du = np.full(shape + (2,), np.nan)
    du[1:-1, 1:-1, :], d2 = interior_derivatives(field)
    d2u = np.full(shape + (2, 2), np.nan)
    d2u[1:-1, 1:-1] = d2
    W = np.sqrt(1.0 + du[..., 0] ** 2 + du[..., 1] ** 2)
    a = d2u / W[..., None, None]
    g = np.empty(shape + (2, 2))
    g[..., 0, 0] = 1.0 + du[..., 0] ** 2
    g[..., 0, 1] = g[..., 1, 0] = du[..., 0] * du[..., 1]
    g[..., 1, 1] = 1.0 + du[..., 1] ** 2
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    g_inv = np.empty_like(g)
    g_inv[..., 0, 0] = g[..., 1, 1] / det
    g_inv[..., 1, 1] = g[..., 0, 0] / det
    g_inv[..., 0, 1] = g_inv[..., 1, 0] = -g[..., 0, 1] / det
    g[np.isnan(W)] = np.nan
    g_inv[np.isnan(W)] = np.nan
    return du, a, g, g_inv, (hx, hy)


def _induced_christoffels(g, g_inv, h):
    """Gamma'^l_jk of the induced metric via finite differences of g."""
    dg = np.stack([_partial(g, m, h[m]) for m in range(2)], axis=-3)
    # dg[..., m, i, j] = partial_m g_ij
    b = np.empty_like(dg)
    for m in range(2):
        for j in range(2):
            for k in range(2):
                b[..., m, j, k] = (
                    dg[..., j, k, m] + dg[..., k, j, m] - dg[..., m, j, k]
                )
    return 0.5 * np.einsum("...lm,...mjk->...ljk", g_inv, b)


def _covariant_derivative_rank2(T, gamma, h):
    """(nabla T)_{ij;k} = partial_k T_ij - Gamma^m_ki T_mj - Gamma^m_kj T_im."""
    dT = np.stack([_partial(T, m, h[m]) for m in range(2)], axis=-3)
    corr_i = np.einsum("...mki,...mj->...kij", gamma, T)
    corr_j = np.einsum("...mkj,...im->...kij", gamma, T)
    return dT - corr_i - corr_j


def _covariant_derivative_rank3(T, gamma, h):
    """(nabla T)_{kij;l} for T with index order (..., k, i, j)."""
    dT = np.stack([_partial(T, m, h[m]) for m in range(2)], axis=-4)
    corr_k = np.einsum("...mlk,...mij->...lkij", gamma, T)
    corr_i = np.einsum("...mli,...kmj->...lkij", gamma, T)
    corr_j = np.einsum("...mlj,...kim->...lkij", gamma, T)
    return dT - corr_k - corr_i - corr_j


def induced_curvature(field):
    """Riemann tensor R'_ijkl of the induced metric, lattice-shaped.

    Computed from finite differences of the induced metric, in the
    convention in which the Gauss identity on a flat ambient reads
    R'_ijkl = a_ik a_jl - a_il a_jk.  NaN on a 3-cell margin.
    """
    _, _, g, g_inv, h = _graph_fd_fields(field)
    gamma = _induced_christoffels(g, g_inv, h)
    dgamma = np.stack([_partial(gamma, m, h[m]) for m in range(2)], axis=-4)
    # dgamma[..., i, l, j, k] = partial_i Gamma^l_jk
    shape = g.shape[:-2]
    r_up = np.zeros(shape + (2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    term = dgamma[..., i, l, j, k] - dgamma[..., j, l, i, k]
                    for m in range(2):
                        term = term + (
                            gamma[..., l, i, m] * gamma[..., m, j, k]
                            - gamma[..., l, j, m] * gamma[..., m, i, k]
                        )
                    r_up[..., i, j, k, l] = term
    # lower the last index with g; the sign matches the convention in which
    # the flat-ambient Gauss identity has a positive a_ik a_jl term
    return -np.einsum("...ijkm,...ml->...ijkl", r_up, g)


def validate_gauss_codazzi_simons(field):
    """Residual report for the Gauss, Codazzi and Simons identities.

    Flat ambient only.  All quantities are rebuilt from centered finite
    differences of the sampled field and of the induced metric; residuals
    are measured at interior nodes at least 3 cells from the boundary and
    decay at second order for smooth graphs.
    """
    d = field.domain
    if d.nx < 8 or d.ny < 8:
        raise ValueError("validation grid needs at least 8 interior nodes per side")
    du, a, g, g_inv, h = _graph_fd_fields(field)
    gamma = _induced_christoffels(g, g_inv, h)

    rp = induced_curvature(field)
    gauss = rp - (
        np.einsum("...ik,...jl->...ijkl", a, a)
        - np.einsum("...il,...jk->...ijkl", a, a)
    )

    grad_a = _covariant_derivative_rank2(a, gamma, h)  # (..., k, i, j) = a_ij;k
    # residual a_ij;k - a_ik;j: exchange the derivative index with the last
    codazzi = grad_a - np.swapaxes(grad_a, -1, -3)

    hess_a = _covariant_derivative_rank3(grad_a, gamma, h)
    # hess_a[..., l, k, i, j] = a_ij;kl
    B = a @ g_inv @ a  # B_ij = a_i^m a_jm
    shape = a.shape[:-2]
    simons = np.full(shape + (2, 2, 2, 2), np.nan)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    lhs = hess_a[..., l, k, i, j]
                    rhs = (
                        hess_a[..., i, j, k, l]
                        + a[..., k, l] * B[..., i, j]
                        - a[..., i, k] * B[..., j, l]
                        + a[..., l, j] * B[..., i, k]
                        - a[..., i, j] * B[..., l, k]
                    )
                    simons[..., i, j, k, l] = lhs - rhs

    sl = (slice(3, -3), slice(3, -3))
    gauss_in = np.abs(gauss[sl])
    codazzi_in = np.abs(codazzi[sl])
    simons_in = np.abs(simons[sl])
    if np.any(np.isnan(gauss_in)) or np.any(np.isnan(simons_in)):
        raise ValueError("finite-difference margin insufficient; grid too small")
    npoints = int(np.prod(gauss_in.shape[:2]))
    return IdentityResiduals(
        gauss_max=float(gauss_in.max()),
        gauss_mean=float(gauss_in.mean()),
        codazzi_max=float(codazzi_in.max()),
        codazzi_mean=float(codazzi_in.mean()),
        simons_max=float(simons_in.max()),
        simons_mean=float(simons_in.mean()),
        spacing=float(max(h)),
        points=npoints,
    )
