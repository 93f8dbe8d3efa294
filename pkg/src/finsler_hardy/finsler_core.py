"""Finsler norms on R^n, their duals, and the lifted norm on the half-space.

Every evaluator accepts arrays of shape ``(..., n)`` and works along the
last axis.  A ``NormSpec`` is immutable once built.

Notation: ``H`` is the norm, ``H0`` its dual

    H0(x) = sup_{xi != 0} <x, xi> / H(xi),

``Phi(xi, y) = sqrt(H(xi)^2 + y^2)`` and ``Phi0(x, y) = sqrt(H0(x)^2 + y^2)``.
The Wulff shape of radius R is ``{H0 <= R}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

FD_STEP = 1e-5
DUAL_TOL = 1e-10
DUAL_MAXITER = 500


class NormError(ValueError):
    pass


def _last_axis(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (n,):
        raise NormError(f"expected vectors of length {n}, got shape {x.shape}")
    return x


def fd_gradient(fn, x, h=FD_STEP):
    """Central finite-difference gradient of a scalar map along the last axis."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    n = x.shape[-1]
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[..., i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return g


# ---------------------------------------------------------------------------
# Numeric dual


@dataclass(frozen=True)
class DualResult:
    value: float
    argmax: np.ndarray
    converged: bool
    iterations: int
    residual: float


def numeric_dual_batch(norm, X, grad=None, starts=None, seed=0, tol=DUAL_TOL, maxiter=DUAL_MAXITER):
    """sup_{N(xi)=1} <x, xi> for every row x of X, by projected ascent.

    ``norm`` and ``grad`` act on arrays of shape (..., n).  Each point gets
    ``starts`` random starts (default 8n) plus x itself; the best value is
    kept.  At the maximiser x is parallel to grad N, so the residual
    |x - f grad N| / |x| measures optimality and the value error is of order
    residual^2.  Returns (values, argmaxes, residuals, iterations).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = X.shape
    if grad is None:
        grad = lambda v: fd_gradient(norm, v)  # noqa: E731
    k = 8 * n if starts is None else starts
    xn = np.linalg.norm(X, axis=1)
    zero = xn == 0.0
    Xs = np.where(zero[:, None], 1.0, X)
    xn = np.where(zero, 1.0, xn)
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((m, k + 1, n))
    xi[:, 0] = Xs
    xi /= norm(xi)[..., None]
    f = np.einsum("mkn,mn->mk", xi, Xs)
    step = np.broadcast_to((0.5 / xn)[:, None], (m, k + 1)).copy()
    res = np.full((m, k + 1), np.inf)
    it = 0
    rows = np.arange(m)
    for it in range(1, maxiter + 1):
        g = grad(xi)
        tang = Xs[:, None, :] - f[..., None] * g
        res = np.linalg.norm(tang, axis=2) / xn[:, None]
        best = np.argmax(f, axis=1)
        if np.all(res[rows, best] < 1e-10):
            break
        cand = xi + step[..., None] * tang
        cand /= norm(cand)[..., None]
        fc = np.einsum("mkn,mn->mk", cand, Xs)
        better = fc >= f
        xi = np.where(better[..., None], cand, xi)
        f = np.where(better, fc, f)
        step = np.where(better, step * 1.5, step * 0.5)
        if np.all(step * xn[:, None] < tol * 1e-6):
            break
    best = np.argmax(f, axis=1)
    val = np.where(zero, 0.0, f[rows, best])
    arg = np.where(zero[:, None], 0.0, xi[rows, best])
    r = np.where(zero, 0.0, res[rows, best])
    return val, arg, r, it


def _polish(norm, grad, x, v0):
    """BFGS on the scale-invariant ratio <x, v> / N(v), started from v0.

    Projected ascent stalls where the unit sphere is strongly curved (l^p
    duals near the axes); the ratio has no constraint and converges there.
    """
    from scipy.optimize import minimize

    if grad is None:
        grad = lambda v: fd_gradient(norm, v)  # noqa: E731

    def fun(v):
        N = float(norm(v[None])[0])
        f = float(v @ x) / N
        return -f, -(x / N - f * grad(v[None])[0] / N)

    res = minimize(fun, v0, jac=True, method="BFGS", options={"gtol": 1e-14, "maxiter": 200})
    v = res.x / float(norm(res.x[None])[0])
    return float(v @ x), v


def numeric_dual(norm, x, grad=None, starts=None, seed=0, tol=DUAL_TOL, maxiter=DUAL_MAXITER):
    """Single-point version of :func:`numeric_dual_batch`, polished by BFGS."""
    x = np.asarray(x, dtype=float)
    val, arg, r, it = numeric_dual_batch(norm, x[None], grad, starts, seed, tol, maxiter)
    v, a, res = float(val[0]), arg[0], float(r[0])
    if v > 0 and res > 1e-10:
        pv, pa = _polish(norm, grad, x, a)
        if pv >= v:
            g = grad(pa[None])[0] if grad is not None else fd_gradient(norm, pa[None])[0]
            v, a = pv, pa
            res = float(np.linalg.norm(x - v * g) / np.linalg.norm(x))
    return DualResult(v, a, bool(res < 1e-5), it, res)


# ---------------------------------------------------------------------------
# Norm specification


@dataclass(frozen=True, eq=False)
class NormSpec:
    """A symmetric Finsler norm on R^n.

    Build one with :meth:`euclidean`, :meth:`ellipsoid`, :meth:`lp` or
    :meth:`custom`.  Custom maps must accept arrays of shape (..., n).
    """

    family: str
    dim: int
    matrix: np.ndarray | None = None
    p: float | None = None
    value_fn: Callable | None = field(default=None, repr=False)
    gradient_fn: Callable | None = field(default=None, repr=False)
    dual_fn: Callable | None = field(default=None, repr=False)
    dual_gradient_fn: Callable | None = field(default=None, repr=False)
    seed: int = 0

    @classmethod
    def euclidean(cls, n):
        if int(n) < 1:
            raise NormError("dimension must be >= 1")
        return cls("euclidean", int(n))

    @classmethod
    def ellipsoid(cls, A):
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise NormError("ellipsoid matrix must be square")
        if not np.allclose(A, A.T, rtol=0, atol=1e-12 * np.abs(A).max()):
            raise NormError("ellipsoid matrix must be symmetric")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise NormError("ellipsoid matrix must be positive definite")
        A.setflags(write=False)
        return cls("ellipsoid", A.shape[0], matrix=A)

    @classmethod
    def lp(cls, p, n):
        p = float(p)
        if not p >= 2.0 or math.isinf(p):
            raise NormError(f"l^p family needs finite p >= 2 (got {p}); smaller p is not C^2")
        return cls("lp", int(n), p=p)

    @classmethod
    def custom(cls, n, value, gradient=None, dual=None, dual_gradient=None, seed=0):
        return cls("custom", int(n), value_fn=value, gradient_fn=gradient,
                   dual_fn=dual, dual_gradient_fn=dual_gradient, seed=seed)

    # -- derived data -------------------------------------------------------

    @cached_property
    def _inv(self):
        return np.linalg.inv(self.matrix)

    @property
    def q(self):
        """Conjugate exponent of the l^p family."""
        return self.p / (self.p - 1.0)

    @property
    def reduced_precision(self):
        """True when a gradient or dual falls back to a numerical approximation."""
        return self.family == "custom" and (self.gradient_fn is None or self.dual_fn is None)

    @property
    def has_closed_dual(self):
        return self.family != "custom" or self.dual_fn is not None

    @cached_property
    def bounds(self):
        """(gamma1, gamma2) with gamma1 |xi| <= H(xi) <= gamma2 |xi|."""
        n = self.dim
        if self.family == "euclidean":
            return 1.0, 1.0
        if self.family == "ellipsoid":
            ev = np.linalg.eigvalsh(self.matrix)
            return float(np.sqrt(ev[0])), float(np.sqrt(ev[-1]))
        if self.family == "lp":
            return n ** (1.0 / self.p - 0.5), 1.0
        v = np.random.default_rng(self.seed).standard_normal((4000 * n, n))
        v /= np.linalg.norm(v, axis=1)[:, None]
        h = self.value(v)
        return float(h.min()), float(h.max())

    # -- evaluators ---------------------------------------------------------

    def value(self, xi):
        xi = _last_axis(xi, self.dim)
        if self.family == "euclidean":
            return np.linalg.norm(xi, axis=-1)
        if self.family == "ellipsoid":
            return np.sqrt(np.einsum("...i,ij,...j->...", xi, self.matrix, xi))
        if self.family == "lp":
            return _lp(xi, self.p)
        return np.asarray(self.value_fn(xi), dtype=float)

    def gradient(self, xi):
        xi = _last_axis(xi, self.dim)
        h = self.value(xi)
        if np.any(h == 0.0):
            raise NormError("the norm is not differentiable at the origin")
        if self.family == "euclidean":
            return xi / h[..., None]
        if self.family == "ellipsoid":
            return (xi @ self.matrix) / h[..., None]
        if self.family == "lp":
            return _lp_grad(xi, h, self.p)
        if self.gradient_fn is not None:
            return np.asarray(self.gradient_fn(xi), dtype=float)
        return fd_gradient(self.value, xi)

    def dual(self, x):
        x = _last_axis(x, self.dim)
        if self.family == "euclidean":
            return np.linalg.norm(x, axis=-1)
        if self.family == "ellipsoid":
            return np.sqrt(np.einsum("...i,ij,...j->...", x, self._inv, x))
        if self.family == "lp":
            return _lp(x, self.q)
        if self.dual_fn is not None:
            return np.asarray(self.dual_fn(x), dtype=float)
        val, _, _, _ = numeric_dual_batch(self.value, x.reshape(-1, self.dim), self.gradient, seed=self.seed)
        return val.reshape(x.shape[:-1])

    def dual_gradient(self, x):
        x = _last_axis(x, self.dim)
        h = self.dual(x)
        if np.any(h == 0.0):
            raise NormError("the dual norm is not differentiable at the origin")
        if self.family == "euclidean":
            return x / h[..., None]
        if self.family == "ellipsoid":
            return (x @ self._inv) / h[..., None]
        if self.family == "lp":
            return _lp_grad(x, h, self.q)
        if self.dual_gradient_fn is not None:
            return np.asarray(self.dual_gradient_fn(x), dtype=float)
        if self.dual_fn is not None:
            return fd_gradient(self.dual, x)
        # the maximiser on the unit H-sphere is grad H0(x)
        _, arg, _, _ = numeric_dual_batch(self.value, x.reshape(-1, self.dim), self.gradient, seed=self.seed)
        return arg.reshape(x.shape)

    def dual_numeric(self, x, seed=None):
        """H0(x) by numerical maximisation, whatever the family."""
        return numeric_dual(self.value, x, grad=self.gradient,
                            seed=self.seed if seed is None else seed)

    def bidual_numeric(self, xi, seed=None):
        """(H0)_0(xi), maximising over the unit H0-sphere."""
        return numeric_dual(self.dual, xi, grad=self.dual_gradient,
                            seed=self.seed if seed is None else seed)


def _lp(x, p):
    a = np.abs(x)
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    return m[..., 0] * np.sum((a / safe) ** p, axis=-1) ** (1.0 / p)


def _lp_grad(x, h, p):
    hh = h[..., None]
    return np.sign(x) * (np.abs(x) / hh) ** (p - 1.0)


# ---------------------------------------------------------------------------
# Functional API


def norm_eval(spec, xi):
    return spec.value(xi)


def dual_norm_eval(spec, x):
    return spec.dual(x)


def norm_gradient(spec, xi):
    return spec.gradient(xi)


def dual_norm_gradient(spec, x):
    return spec.dual_gradient(x)


def polar_decompose(spec, x):
    """Return (r, w) with r = H0(x) and w = x / r on the unit dual sphere."""
    x = _last_axis(x, spec.dim)
    r = spec.dual(x)
    if np.any(r == 0.0):
        raise NormError("polar decomposition is undefined at the origin")
    return r, x / np.asarray(r)[..., None]


@dataclass(frozen=True, eq=False)
class LiftedNorm:
    """Phi(xi, y) = sqrt(H(xi)^2 + y^2) on R^{n+1} and its dual Phi0."""

    base: NormSpec

    @property
    def dim(self):
        return self.base.dim + 1

    def value(self, zeta):
        zeta = _last_axis(zeta, self.dim)
        return np.hypot(self.base.value(zeta[..., :-1]), zeta[..., -1])

    def dual(self, z):
        z = _last_axis(z, self.dim)
        return np.hypot(self.base.dual(z[..., :-1]), z[..., -1])

    def gradient(self, zeta):
        zeta = _last_axis(zeta, self.dim)
        h = self.base.value(zeta[..., :-1])
        phi = np.hypot(h, zeta[..., -1])
        gx = self.base.gradient(zeta[..., :-1]) * (h / phi)[..., None]
        return np.concatenate([gx, (zeta[..., -1] / phi)[..., None]], axis=-1)

    def dual_gradient(self, z):
        """grad Phi0 = (H0 grad H0, y) / Phi0."""
        z = _last_axis(z, self.dim)
        h0 = self.base.dual(z[..., :-1])
        phi0 = np.hypot(h0, z[..., -1])
        gx = self.base.dual_gradient(z[..., :-1]) * (h0 / phi0)[..., None]
        return np.concatenate([gx, (z[..., -1] / phi0)[..., None]], axis=-1)


# ---------------------------------------------------------------------------
# Spheres and the Wulff shape


def _smooth_map(s):
    # quintic smoothstep: flattens endpoint singularities of the integrand
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s), 30.0 * s * s * (1.0 - s) ** 2


def _panel_rule(a, b, order):
    s, w = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    u, du = _smooth_map(s)
    return a + (b - a) * u, (b - a) * du * w


def sphere_rule(n, order=24):
    """Nodes and weights on the Euclidean unit sphere S^{n-1}.

    Hyperspherical angles, each split where a coordinate vanishes, with
    Gauss-Legendre on every panel after a smoothing substitution.  Splitting
    at the coordinate planes keeps the cusps of l^q duals on panel edges.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    az, waz = [], []
    for k in range(4):
        t, w = _panel_rule(k * math.pi / 2, (k + 1) * math.pi / 2, order)
        az.append(t)
        waz.append(w)
    az = np.concatenate(az)
    waz = np.concatenate(waz)
    pts = np.stack([np.cos(az), np.sin(az)], axis=1)
    wts = waz
    # add polar angles one dimension at a time: v = (cos t, sin t * u)
    for d in range(3, n + 1):
        t1, w1 = _panel_rule(0.0, math.pi / 2, order)
        t2, w2 = _panel_rule(math.pi / 2, math.pi, order)
        t = np.concatenate([t1, t2])
        wt = np.concatenate([w1, w2]) * np.sin(t) ** (d - 2)
        c = np.cos(t)[:, None, None]
        s = np.sin(t)[:, None, None]
        new = np.concatenate([np.broadcast_to(c, (t.size, pts.shape[0], 1)), s * pts[None]], axis=2)
        pts = new.reshape(-1, d)
        wts = (wt[:, None] * wts[None]).ravel()
    return pts, wts


def wulff_rule(spec, order=24):
    """Quadrature on the unit Wulff boundary in cone measure.

    Returns nodes w with H0(w) = 1 and weights summing to the perimeter
    omega, so that for H0-radial integrands

        int f(H0(x)) g(x / H0(x)) dx = int_0^inf f(r) r^{n-1} dr * sum_i W_i g(w_i).
    """
    v, s = sphere_rule(spec.dim, order)
    h0 = spec.dual(v)
    return v / h0[:, None], s * h0 ** (-spec.dim)


def wulff_perimeter(spec, order=24):
    """omega = n |{H0 <= 1}| = int_{S^{n-1}} H0(v)^{-n} dsigma(v)."""
    return float(math.fsum(wulff_rule(spec, order)[1]))


def euclidean_perimeter(n):
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def wulff_perimeter_midpoint(spec, cells=400, levels=2, chunk=2_000_000):
    """Independent estimate of omega: midpoint rule on the membership indicator.

    The box is [-R, R]^n with R slightly above gamma2, which contains
    {H0 <= 1} because H0(x) >= |x| / gamma2.  Returns (value, error_estimate)
    where the value is from the finest grid and the error is the change from
    the previous level.  Supports n <= 4.
    """
    n = spec.dim
    if n > 4:
        raise NormError("midpoint oracle supports n <= 4")
    R = 1.02 * spec.bounds[1]
    vals = []
    m = cells
    for _ in range(levels):
        h = 2.0 * R / m
        axis = -R + h * (np.arange(m) + 0.5)
        count = 0
        total = m ** n
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk))
            coords = np.empty((idx.size, n))
            rem = idx
            for d in range(n):
                coords[:, d] = axis[rem % m]
                rem = rem // m
            count += int(np.count_nonzero(spec.dual(coords) <= 1.0))
        vals.append(n * count * h ** n)
        m *= 2
    err = abs(vals[-1] - vals[-2]) if len(vals) > 1 else float("nan")
    return vals[-1], err


@dataclass(frozen=True, eq=False)
class WulffShape:
    norm: NormSpec
    radius: float = 1.0

    @cached_property
    def perimeter(self):
        """Anisotropic perimeter omega of the unit shape."""
        return wulff_perimeter(self.norm)

    @property
    def volume(self):
        return self.perimeter * self.radius ** self.norm.dim / self.norm.dim

    def contains(self, x):
        return self.norm.dual(x) <= self.radius


# ---------------------------------------------------------------------------
# Identity checks


@dataclass
class IdentityReport:
    family: str
    samples: int
    tol: float
    violations: dict
    all_converged: bool

    @property
    def passed(self):
        return all(v <= self.tol for v in self.violations.values())

    def as_dict(self):
        return {"family": self.family, "samples": self.samples, "tol": self.tol,
                "violations": dict(self.violations), "passed": self.passed,
                "all_converged": self.all_converged}


def verify_norm_identities(spec, sample_count=100, tol=1e-8, seed=0, bidual_samples=None):
    """Check the basic Finsler identities on random samples.

    Reported maximum violations (relative where a scale is natural):

    - ``H(grad H0(x)) = 1`` and ``H0(grad H(xi)) = 1``
    - Euler relations ``<x, grad H0(x)> = H0(x)`` and ``<xi, grad H(xi)> = H(xi)``
    - ``<x, xi> <= H0(x) H(xi)`` (positive part of the excess) and equality at
      ``x = lam H(xi) grad H(xi)``
    - ``grad H(grad H0(x)) = x / H0(x)``
    - ``(H0)_0 = H`` by numerical maximisation over the unit H0-sphere,
      on the first ``bidual_samples`` points (default: all of them when H0
      has a closed form, 3 otherwise since that is a nested maximisation).
    """
    rng = np.random.default_rng(seed)
    n = spec.dim
    x = rng.standard_normal((sample_count, n)) * np.exp(rng.uniform(-1, 1, (sample_count, 1)))
    xi = rng.standard_normal((sample_count, n)) * np.exp(rng.uniform(-1, 1, (sample_count, 1)))
    lam = np.exp(rng.uniform(-1, 1, sample_count))

    H = spec.value(xi)
    H0 = spec.dual(x)
    gH = spec.gradient(xi)
    gH0 = spec.dual_gradient(x)
    v = {}
    v["H(grad H0)=1"] = float(np.max(np.abs(spec.value(gH0) - 1.0)))
    v["H0(grad H)=1"] = float(np.max(np.abs(spec.dual(gH) - 1.0)))
    v["<x,grad H0>=H0"] = float(np.max(np.abs(np.sum(x * gH0, -1) - H0) / H0))
    v["<xi,grad H>=H"] = float(np.max(np.abs(np.sum(xi * gH, -1) - H) / H))
    excess = np.sum(x * xi, -1) - H0 * H
    v["schwarz"] = float(max(0.0, np.max(excess / (H0 * H))))
    xe = (lam * H)[:, None] * gH
    v["schwarz equality"] = float(np.max(np.abs(np.sum(xe * xi, -1) - spec.dual(xe) * H) / (spec.dual(xe) * H)))
    v["grad H(grad H0)=x/H0"] = float(np.max(np.linalg.norm(spec.gradient(gH0) - x / H0[:, None], axis=-1)
                                              / np.linalg.norm(x / H0[:, None], axis=-1)))
    if bidual_samples is None:
        bidual_samples = sample_count if spec.has_closed_dual else 3
    m = min(bidual_samples, sample_count)
    worst, conv = 0.0, True
    for i in range(m):
        r = spec.bidual_numeric(xi[i], seed=seed + i)
        conv &= r.converged
        worst = max(worst, abs(r.value - H[i]) / H[i])
    v["bidual=H"] = worst
    return IdentityReport(spec.family, sample_count, tol, v, bool(conv))
