"""Symmetric curvature functions on Garding cones.

Elementary symmetric polynomials S_k, their k-th roots and quotient roots
(S_k/S_l)^(1/(k-l)), first and second derivatives in the eigenvalue frame,
cone membership, and an empirical audit of the ellipticity and concavity
structure of a chosen curvature function over a level band.

All evaluation routines broadcast over a leading batch shape: an eigenvalue
argument of shape (..., n) produces results of shape (...).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConeViolationError, SamplingError

KIND_SIGMA = "sigma"                   # f = S_k
KIND_SIGMA_ROOT = "sigma-root"         # f = S_k^(1/k)
KIND_QUOTIENT_ROOT = "quotient-root"   # f = (S_k/S_l)^(1/(k-l))

_KINDS = (KIND_SIGMA, KIND_SIGMA_ROOT, KIND_QUOTIENT_ROOT)

# Relative eigenvalue gap below which divided differences switch to the
# analytic limit; avoids catastrophic cancellation near umbilic points.
_PAIR_GAP = 1e-9


@dataclass(frozen=True)
class CurvatureSpec:
    """Which curvature function to use, its cone and normalization.

    The admissibility cone is Gamma_k = {lam : S_j(lam) > 0, j = 1..k} for
    all three kinds (k is the numerator index for quotients).  When
    ``normalized`` is set, S_k is divided by binomial(n, k) before rooting
    (and S_l by binomial(n, l) for quotients).
    """

    kind: str
    n: int
    k: int
    l: int = 0
    normalized: bool = False

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown curvature kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.kind == KIND_QUOTIENT_ROOT and not 1 <= self.l < self.k:
            raise ValueError(f"need 1 <= l < k, got l={self.l}, k={self.k}")
        if self.kind != KIND_QUOTIENT_ROOT and self.l != 0:
            raise ValueError("l is only meaningful for quotient kinds")

    @classmethod
    def sigma_k_root(cls, k, n, normalized=False):
        return cls(KIND_SIGMA_ROOT, n, k, normalized=normalized)

    @classmethod
    def quotient_root(cls, k, l, n, normalized=False):
        return cls(KIND_QUOTIENT_ROOT, n, k, l, normalized=normalized)

    @classmethod
    def raw_sigma_k(cls, k, n, normalized=False):
        return cls(KIND_SIGMA, n, k, normalized=normalized)

    @property
    def cone_degree(self):
        """Order k of the Gamma_k cone attached to this function."""
        return self.k

    @property
    def homogeneity_degree(self):
        """f(s*lam) = s**degree * f(lam) for s > 0."""
        return self.k if self.kind == KIND_SIGMA else 1

    def label(self):
        if self.kind == KIND_SIGMA:
            return f"S_{self.k}"
        if self.kind == KIND_SIGMA_ROOT:
            return f"S_{self.k}^(1/{self.k})"
        return f"(S_{self.k}/S_{self.l})^(1/{self.k - self.l})"


@dataclass(frozen=True)
class EigenDerivatives:
    """First and second derivatives of f in the eigenvalue frame.

    ``hessian`` holds the second partials f_kl.  ``pair_coefficients`` holds
    the divided differences (f_k - f_l)/(lam_k - lam_l) off the diagonal
    (zero on the diagonal), with the analytic limit f_kk - f_kl substituted
    when eigenvalues nearly coincide.  Together they make the eigenframe
    second-derivative quadratic form directly evaluable.
    """

    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    pair_coefficients: np.ndarray


@dataclass(frozen=True)
class ConeCheck:
    """Outcome of a cone-membership test with first-failure detail."""

    ok: bool
    failing_index: int | None = None
    failing_value: float | None = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class StructureReport:
    """Empirical margins of the structure conditions over a sampled band."""

    condition_flags: dict
    worst_margins: dict
    c0_estimate: float
    sample_count: int

    @property
    def all_ok(self):
        return all(self.condition_flags.values())


def _as_batch(lam, n=None):
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        raise ValueError("eigenvalue argument must have a trailing axis")
    if n is not None and lam.shape[-1] != n:
        raise ValueError(f"expected {n} eigenvalues, got {lam.shape[-1]}")
    return lam


def _maybe_scalar(res, lam):
    if lam.ndim == 1:
        return float(res)
    return res


def elementary_symmetric_all(lam, kmax):
    """All S_0..S_kmax of lam (..., n), stacked on a new trailing axis.

    Uses the Newton-identity recurrence on power sums; S_0 = 1.
    """
    lam = _as_batch(lam)
    n = lam.shape[-1]
    if kmax > n or kmax < 0:
        raise ValueError(f"order must satisfy 0 <= k <= {n}, got {kmax}")
    batch = lam.shape[:-1]
    p = [None]
    for j in range(1, kmax + 1):
        p.append(np.sum(lam**j, axis=-1))
    e = [np.ones(batch)]
    for m in range(1, kmax + 1):
        acc = np.zeros(batch)
        sign = 1.0
        for j in range(1, m + 1):
            acc = acc + sign * e[m - j] * p[j]
            sign = -sign
        e.append(acc / m)
    return np.stack(e, axis=-1)


def elementary_symmetric(k, lam):
    """S_k(lam), the sum over k-subsets of eigenvalue products."""
    lam = _as_batch(lam)
    n = lam.shape[-1]
    if k < 0 or k > n:
        raise ValueError(f"order must satisfy 0 <= k <= {n}, got {k}")
    return _maybe_scalar(elementary_symmetric_all(lam, k)[..., k], lam)


def _esp_without(lam, kmax):
    """S_0..S_kmax of lam with each coordinate removed in turn.

    Returns shape (..., n, kmax+1); entry [..., i, j] is S_j(lam \\ lam_i).
    """
    lam = _as_batch(lam)
    n = lam.shape[-1]
    outs = []
    for i in range(n):
        outs.append(elementary_symmetric_all(np.delete(lam, i, axis=-1), kmax))
    return np.stack(outs, axis=-2)


def cone_margins(spec, lam):
    """S_1..S_k of lam, shape (..., k); all must be > 0 for admissibility."""
    lam = _as_batch(lam, spec.n)
    return elementary_symmetric_all(lam, spec.cone_degree)[..., 1:]


def cone_mask(spec, lam):
    """Boolean batch mask: True where lam lies strictly inside Gamma_k."""
    return np.all(cone_margins(spec, lam) > 0.0, axis=-1)


def in_cone(spec, lam):
    """Strict Gamma_k membership with first-failure detail (total function)."""
    lam = _as_batch(lam, spec.n)
    if lam.ndim != 1:
        raise ValueError("in_cone takes a single eigenvalue vector; "
                         "use cone_mask for batches")
    margins = cone_margins(spec, lam)
    for j, s in enumerate(margins, start=1):
        if not s > 0.0:
            return ConeCheck(False, j, float(s))
    return ConeCheck(True)


def _require_cone(spec, lam, location=None):
    margins = cone_margins(spec, lam)
    bad = ~np.all(margins > 0.0, axis=-1)
    if np.any(bad):
        flat = np.argwhere(np.atleast_1d(bad))[0]
        m = margins[tuple(flat)] if margins.ndim > 1 else margins
        j = int(np.argmax(~(np.atleast_1d(m) > 0.0))) + 1
        val = float(np.atleast_1d(m)[j - 1])
        where = location
        if where is None and lam.ndim > 1:
            where = tuple(int(v) for v in flat)
        raise ConeViolationError(j, val, where)


def _norm_constant(spec, order):
    return math.comb(spec.n, order) if spec.normalized else 1.0


def evaluate(spec, lam, location=None):
    """f(lam) per the spec kind; raises ConeViolationError outside Gamma_k."""
    lam = _as_batch(lam, spec.n)
    _require_cone(spec, lam, location)
    e = elementary_symmetric_all(lam, spec.k)
    sk = e[..., spec.k] / _norm_constant(spec, spec.k)
    if spec.kind == KIND_SIGMA:
        return _maybe_scalar(sk, lam)
    if spec.kind == KIND_SIGMA_ROOT:
        return _maybe_scalar(sk ** (1.0 / spec.k), lam)
    sl = e[..., spec.l] / _norm_constant(spec, spec.l)
    return _maybe_scalar((sk / sl) ** (1.0 / (spec.k - spec.l)), lam)


def value_and_gradient(spec, lam, location=None):
    """f and its eigenvalue gradient, batched.

    The gradient of S_k uses dS_k/dlam_i = S_{k-1}(lam with entry i removed);
    roots and quotients apply the chain rule on top.
    """
    lam = _as_batch(lam, spec.n)
    _require_cone(spec, lam, location)
    k, l = spec.k, spec.l
    e = elementary_symmetric_all(lam, k)
    red = _esp_without(lam, k - 1)
    ck = _norm_constant(spec, k)
    sk = e[..., k] / ck
    sk_grad = red[..., k - 1] / ck
    if spec.kind == KIND_SIGMA:
        return _maybe_scalar(sk, lam), sk_grad
    if spec.kind == KIND_SIGMA_ROOT:
        val = sk ** (1.0 / k)
        grad = (val / (k * sk))[..., None] * sk_grad
        return _maybe_scalar(val, lam), grad
    cl = _norm_constant(spec, l)
    sl = e[..., l] / cl
    sl_grad = red[..., l - 1] / cl
    q = sk / sl
    q_grad = (sk_grad * sl[..., None] - sk[..., None] * sl_grad) / (sl**2)[..., None]
    m = k - l
    val = q ** (1.0 / m)
    grad = (val / (m * q))[..., None] * q_grad
    return _maybe_scalar(val, lam), grad


def _sigma_hessian(lam, k):
    """Second partials of S_k: S_{k-2} with two entries removed (0 diagonal)."""
    n = lam.shape[-1]
    h = np.zeros((n, n))
    if k < 2:
        return h
    for i in range(n):
        for j in range(i + 1, n):
            reduced = np.delete(lam, (i, j), axis=-1)
            v = elementary_symmetric_all(reduced, k - 2)[..., k - 2]
            h[i, j] = h[j, i] = v
    return h


def eigen_derivatives(spec, lam):
    """Full eigenframe derivative data of f at a single admissible point."""
    lam = _as_batch(lam, spec.n)
    if lam.ndim != 1:
        raise ValueError("eigen_derivatives takes a single eigenvalue vector")
    _require_cone(spec, lam)
    k, l, n = spec.k, spec.l, spec.n
    ck = _norm_constant(spec, k)
    e = elementary_symmetric_all(lam, k)
    red = _esp_without(lam, k - 1)
    sk = e[k] / ck
    sk_grad = red[:, k - 1] / ck
    sk_hess = _sigma_hessian(lam, k) / ck

    if spec.kind == KIND_SIGMA:
        value, grad, hess = sk, sk_grad, sk_hess
    elif spec.kind == KIND_SIGMA_ROOT:
        r = 1.0 / k
        value = sk**r
        grad = r * sk ** (r - 1.0) * sk_grad
        hess = (
            r * (r - 1.0) * sk ** (r - 2.0) * np.outer(sk_grad, sk_grad)
            + r * sk ** (r - 1.0) * sk_hess
        )
    else:
        cl = _norm_constant(spec, l)
        sl = e[l] / cl
        sl_grad = red[:, l - 1] / cl
        sl_hess = _sigma_hessian(lam, l) / cl
        q = sk / sl
        q_grad = (sk_grad * sl - sk * sl_grad) / sl**2
        q_hess = (
            sk_hess / sl
            - (np.outer(sk_grad, sl_grad) + np.outer(sl_grad, sk_grad)) / sl**2
            - sk * sl_hess / sl**2
            + 2.0 * sk * np.outer(sl_grad, sl_grad) / sl**3
        )
        r = 1.0 / (k - l)
        value = q**r
        grad = r * q ** (r - 1.0) * q_grad
        hess = r * (r - 1.0) * q ** (r - 2.0) * np.outer(q_grad, q_grad) + r * q ** (
            r - 1.0
        ) * q_hess

    pair = np.zeros((n, n))
    gap_tol = _PAIR_GAP * (1.0 + float(np.linalg.norm(lam)))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = lam[i] - lam[j]
            if abs(d) < gap_tol:
                pair[i, j] = hess[i, i] - hess[i, j]
            else:
                pair[i, j] = (grad[i] - grad[j]) / d
    return EigenDerivatives(float(value), grad, hess, pair)


def hessian_quadratic_form(spec, lam, eta):
    """Eigenframe second-derivative form of F applied to a symmetric eta.

    Sum over f_kl eta_kk eta_ll plus the divided-difference terms on the
    squared off-diagonal entries; non-positive for concave kinds.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (spec.n, spec.n) or not np.allclose(eta, eta.T):
        raise ValueError("eta must be a symmetric n x n matrix")
    d = eigen_derivatives(spec, lam)
    diag = np.diag(eta)
    total = float(diag @ d.hessian @ diag)
    off = eta**2 * d.pair_coefficients
    total += float(np.sum(off) - np.trace(off))
    return total


def sample_cone_band(spec, psi0, psi1, count, rng, max_attempts=10000, margin=0.0):
    """Draw ``count`` points of {lam in Gamma_k : psi0 <= f(lam) <= psi1}.

    Directions are rejection-sampled from the unit box into the cone, then
    scaled exactly onto a uniformly drawn level in the band (f is homogeneous,
    so the scaling is closed-form).  A positive ``margin`` additionally
    rejects directions whose normalized cone margins min_j S_j(lam/|lam|)
    fall below it, keeping samples away from the cone boundary.  Raises
    SamplingError if the cone rejection exhausts its attempt budget.
    """
    if not 0.0 < psi0 <= psi1:
        raise ValueError("need 0 < psi0 <= psi1")
    if count < 1:
        raise ValueError("need at least one sample")
    deg = spec.homogeneity_degree
    out = np.empty((count, spec.n))
    made = 0
    attempts = 0
    while made < count:
        if attempts >= max_attempts:
            raise SamplingError(
                f"no admissible sample after {max_attempts} attempts "
                f"(cone Gamma_{spec.cone_degree}, n={spec.n})"
            )
        attempts += 1
        lam = rng.uniform(-1.0, 1.0, size=spec.n)
        unit = lam / np.linalg.norm(lam)
        if not np.all(cone_margins(spec, unit) > margin):
            continue
        target = rng.uniform(psi0, psi1)
        s = (target / evaluate(spec, lam)) ** (1.0 / deg)
        out[made] = s * lam
        made += 1
    return out


def _boundary_value_estimate(spec, lam, bisection_steps=80):
    """f just inside the cone boundary, reached along lam - s*(1,..,1)."""
    ones = np.ones(spec.n) / math.sqrt(spec.n)
    s_hi = float(elementary_symmetric(1, lam)) / float(np.sum(ones))
    s_lo = 0.0
    for _ in range(bisection_steps):
        mid = 0.5 * (s_lo + s_hi)
        if np.all(cone_margins(spec, lam - mid * ones) > 0.0):
            s_lo = mid
        else:
            s_hi = mid
    return float(evaluate(spec, lam - s_lo * ones))


def audit_structure_conditions(spec, psi0, psi1, samples, seed):
    """Empirical audit of the structure conditions over the band Gamma_Psi.

    Samples points with psi0 <= f <= psi1 and reports, per condition, the
    worst observed margin: positive gradient entries, concavity of the
    eigenframe quadratic form, the gradient sum, the Euler form
    sum(f_i lam_i) and its concavity upper bound f, decay of f toward the
    cone boundary, gradient entries on negative eigenvalue directions, and
    the geometric mean of the gradient.  The reported c0 is the smallest
    margin among the conditions that share the paper-style uniform constant;
    it is an empirical minimum over the sample, not a certified bound.
    """
    if samples < 1:
        raise ValueError("need samples >= 1")
    rng = np.random.default_rng(seed)
    pts = sample_cone_band(spec, psi0, psi1, samples, rng)

    g_pos = math.inf
    conc = math.inf
    g_sum = math.inf
    euler = math.inf
    euler_upper = math.inf
    neg_grad = math.inf
    g_prod = math.inf
    boundary_f = -math.inf

    for lam in pts:
        val, grad = value_and_gradient(spec, lam)
        g_pos = min(g_pos, float(np.min(grad)))
        g_sum = min(g_sum, float(np.sum(grad)))
        dot = float(grad @ lam)
        euler = min(euler, dot)
        euler_upper = min(euler_upper, val - dot)
        neg = lam < 0.0
        if np.any(neg):
            neg_grad = min(neg_grad, float(np.min(grad[neg])))
        g_prod = min(g_prod, float(np.prod(grad) ** (1.0 / spec.n)))
        eta = rng.standard_normal((spec.n, spec.n))
        eta = 0.5 * (eta + eta.T)
        conc = min(conc, -hessian_quadratic_form(spec, lam, eta))
        boundary_f = max(boundary_f, _boundary_value_estimate(spec, lam))

    margins = {
        "gradient_positive": g_pos,
        "concavity": conc,
        "gradient_sum": g_sum,
        "gradient_dot_point": euler,
        "gradient_dot_point_upper": euler_upper,
        "boundary_decay": psi0 - boundary_f,
        "negative_coordinate_gradient": neg_grad,
        "gradient_product": g_prod,
    }
    roundoff = 1e-12 * max(1.0, psi1)
    flags = {
        "gradient_positive": g_pos > 0.0,
        "concavity": conc >= -roundoff,
        "gradient_sum": g_sum > 0.0,
        "gradient_dot_point": euler > 0.0,
        "gradient_dot_point_upper": euler_upper >= -roundoff,
        "boundary_decay": boundary_f < psi0,
        "negative_coordinate_gradient": neg_grad > 0.0,
        "gradient_product": g_prod > 0.0,
    }
    c0_parts = [g_sum, euler, g_prod]
    if math.isfinite(neg_grad):
        c0_parts.append(neg_grad)
    c0 = max(0.0, min(c0_parts))
    return StructureReport(flags, margins, c0, samples)
