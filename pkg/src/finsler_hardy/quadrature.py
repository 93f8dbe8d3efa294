"""Weighted quadrature on half-space domains.

Points are z = (x, y) with y >= 0.  Bulk integrals carry the weight y^alpha.
Domains are described in meridian polar coordinates

    x = rho cos(phi) w,   y = rho sin(phi),   H0(w) = 1,

so that dz = rho^n cos(phi)^{n-1} d rho d phi d mu(w), where mu is the cone
measure on the Wulff boundary (total mass omega).  The y^alpha factor becomes
rho^alpha sin(phi)^alpha; both powers are absorbed by Gauss-Jacobi rules on
the panels touching phi = 0 and rho = 0.

Compactly supported integrands (test functions) use ``integrate_box``, a
Cartesian tensor rule over the support box, which avoids wasting nodes
outside the support.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import roots_jacobi

from .finsler_core import LiftedNorm, NormSpec, wulff_rule

CHUNK = 400_000


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    node_count: int
    flagged: bool = False

    def __add__(self, other):
        return QuadratureResult(self.value + other.value,
                                self.error_estimate + other.error_estimate,
                                self.node_count + other.node_count,
                                self.flagged or other.flagged)

    def scaled(self, c):
        return QuadratureResult(c * self.value, abs(c) * self.error_estimate,
                                self.node_count, self.flagged)


@dataclass(frozen=True)
class QuadratureConfig:
    """Resolution knobs; ``None`` means derive from the level."""

    radial_levels: int | None = None
    angular_nodes: int | None = None
    jacobi_order: int | None = None

    def radial(self, level):
        return (self.radial_levels or 5) + 2 * level

    def angular(self, level):
        return (self.angular_nodes or 12) + 4 * level

    def order(self, level):
        return (self.jacobi_order or 6) + 2 * level


DEFAULT_CONFIG = QuadratureConfig()


# ---------------------------------------------------------------------------
# 1-D rules


def gauss_legendre(a, b, order):
    s, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (b - a) * (s + 1.0) + a, 0.5 * (b - a) * w


_JACOBI_CACHE: dict = {}


def gauss_jacobi(a, b, order, power):
    """Nodes and weights for int_a^b (t - a)^power g(t) dt."""
    if power <= -1.0:
        raise QuadratureError("Jacobi weight must be integrable (power > -1)")
    key = (order, float(power))
    if key not in _JACOBI_CACHE:
        _JACOBI_CACHE[key] = roots_jacobi(order, 0.0, float(power))
    x, w = _JACOBI_CACHE[key]
    h = 0.5 * (b - a)
    return a + h * (x + 1.0), w * h ** (1.0 + power)


def graded_breaks(a, b, panels, ratio=0.5):
    """Breakpoints on [a, b] refined geometrically toward a."""
    inner = [a + (b - a) * ratio ** j for j in range(panels, -1, -1)]
    return np.array([a] + inner)


def composite_rule(breaks, order, power=0.0):
    """Composite Gauss rule on the given panels.

    The first panel uses Gauss-Jacobi with weight (t - breaks[0])^power; the
    weight is multiplied back in explicitly on the other panels, so the rule
    always approximates int (t - t0)^power g(t) dt.
    """
    xs, ws = [], []
    t0 = breaks[0]
    for j in range(len(breaks) - 1):
        a, b = breaks[j], breaks[j + 1]
        if j == 0 and power != 0.0:
            x, w = gauss_jacobi(a, b, order, power)
        else:
            x, w = gauss_legendre(a, b, order)
            if power != 0.0:
                w = w * (x - t0) ** power
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def stable_sum(values):
    """Correctly rounded sum; independent of evaluation order."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


# ---------------------------------------------------------------------------
# Domains


class DomainKind(str, Enum):
    CYLINDER = "cylinder"
    WULFF_HALF_BALL = "wulff_half_ball"
    CONE = "cone"
    BOUNDARY_DISK = "boundary_disk"


def _lift(norm):
    if isinstance(norm, LiftedNorm):
        return norm
    if isinstance(norm, NormSpec):
        return LiftedNorm(norm)
    raise TypeError("norm must be a NormSpec or LiftedNorm")


@dataclass(frozen=True, eq=False)
class DomainSpec:
    kind: DomainKind
    norm: LiftedNorm
    R: float = 1.0
    R_y: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if not (self.R > 0 and self.R_y > 0):
            raise ValueError("domain extents must be positive")
        if self.kind == DomainKind.CONE and not 0.0 < self.theta < math.pi / 2:
            raise ValueError("cone aperture theta must lie in (0, pi/2)")

    @classmethod
    def cylinder(cls, norm, R_x=1.0, R_y=1.0):
        """{H0(x) < R_x, 0 < y < R_y}."""
        return cls(DomainKind.CYLINDER, _lift(norm), float(R_x), float(R_y))

    @classmethod
    def wulff_half_ball(cls, norm, R=1.0):
        """{Phi0(z) < R, y > 0}."""
        return cls(DomainKind.WULFF_HALF_BALL, _lift(norm), float(R))

    @classmethod
    def cone(cls, norm, theta, R=1.0):
        """{y > tan(theta) H0(x), Phi0(z) < R}."""
        return cls(DomainKind.CONE, _lift(norm), float(R), theta=float(theta))

    @classmethod
    def boundary_disk(cls, norm, R=1.0):
        """{H0(x) < R} in the boundary hyperplane."""
        return cls(DomainKind.BOUNDARY_DISK, _lift(norm), float(R))

    @property
    def n(self):
        return self.norm.base.dim

    @property
    def D(self):
        """sup Phi0 over the domain."""
        if self.kind == DomainKind.CYLINDER:
            return math.hypot(self.R, self.R_y)
        return self.R

    @property
    def trace_radius(self):
        """H0-radius of the part of the domain's bottom boundary."""
        if self.kind == DomainKind.CONE:
            return self.R * math.cos(self.theta)
        return self.R

    def phi_breaks(self):
        if self.kind == DomainKind.CYLINDER:
            return [0.0, math.atan2(self.R_y, self.R), math.pi / 2]
        if self.kind == DomainKind.CONE:
            return [self.theta, 0.5 * (self.theta + math.pi / 2), math.pi / 2]
        if self.kind == DomainKind.WULFF_HALF_BALL:
            return [0.0, math.pi / 4, math.pi / 2]
        raise QuadratureError("boundary disks have no bulk")

    def rho_max(self, phi):
        phi = np.asarray(phi, dtype=float)
        if self.kind == DomainKind.CYLINDER:
            with np.errstate(divide="ignore"):
                a = np.where(np.cos(phi) > 0, self.R / np.cos(phi), np.inf)
                b = np.where(np.sin(phi) > 0, self.R_y / np.sin(phi), np.inf)
            return np.minimum(a, b)
        return np.full_like(phi, self.R)

    def contains(self, z):
        z = np.asarray(z, dtype=float)
        x, y = z[..., :-1], z[..., -1]
        h0 = self.norm.base.dual(x)
        if self.kind == DomainKind.CYLINDER:
            return (h0 < self.R) & (y > 0) & (y < self.R_y)
        inside = np.hypot(h0, y) < self.R
        if self.kind == DomainKind.CONE:
            return inside & (y > math.tan(self.theta) * h0)
        return inside & (y > 0)

    def describe(self):
        d = {"kind": self.kind.value, "R": self.R, "family": self.norm.base.family}
        if self.kind == DomainKind.CYLINDER:
            d["R_y"] = self.R_y
        if self.kind == DomainKind.CONE:
            d["theta"] = self.theta
        return d


# ---------------------------------------------------------------------------
# Evaluation helpers


def _eval_weighted(f, pts, wts):
    """sum_i w_i f(p_i) in chunks; rejects non-finite samples."""
    parts = []
    for i in range(0, pts.shape[0], CHUNK):
        v = np.asarray(f(pts[i:i + CHUNK]), dtype=float)
        if not np.all(np.isfinite(v)):
            raise QuadratureError("non-finite integrand sample")
        parts.append(v * wts[i:i + CHUNK])
    return stable_sum(np.concatenate(parts)) if parts else 0.0


def _two_level(rule, levels, tol):
    lo_val, lo_n = rule(levels)
    hi_val, hi_n = rule(levels + 1)
    err = abs(hi_val - lo_val)
    flagged = tol is not None and err > tol * max(1.0, abs(hi_val))
    return QuadratureResult(hi_val, err, lo_n + hi_n, flagged)


def _angular(dom, level, cfg):
    base = dom.norm.base
    if base.dim == 1:
        return wulff_rule(base)
    return wulff_rule(base, cfg.angular(level))


# ---------------------------------------------------------------------------
# Domain integrals


def _bulk_rule(f, alpha, dom, level, cfg, origin_power):
    n = dom.n
    q = cfg.order(level)
    wv, wmu = _angular(dom, level, cfg)
    breaks = dom.phi_breaks()
    phi, wphi = composite_rule(np.array(breaks), q, alpha if breaks[0] == 0.0 else 0.0)
    # strip the Jacobi weight phi^alpha back to sin(phi)^alpha
    if breaks[0] == 0.0 and alpha != 0.0:
        wphi = wphi * (np.sin(phi) / phi) ** alpha
    elif alpha != 0.0:
        wphi = wphi * np.sin(phi) ** alpha
    wphi = wphi * np.cos(phi) ** (n - 1)
    s, ws = composite_rule(graded_breaks(0.0, 1.0, cfg.radial(level)), q, n + alpha - origin_power)
    ws = ws * s ** origin_power
    total = 0.0
    count = 0
    rmax = dom.rho_max(phi)
    for j in range(phi.size):
        rho = rmax[j] * s
        wr = ws * rmax[j] ** (n + alpha + 1.0) * wphi[j]
        x = (rho * math.cos(phi[j]))[:, None, None] * wv[None, :, :]
        y = np.broadcast_to((rho * math.sin(phi[j]))[:, None, None], (rho.size, wv.shape[0], 1))
        pts = np.concatenate([x, y], axis=2).reshape(-1, n + 1)
        w = (wr[:, None] * wmu[None, :]).ravel()
        total += _eval_weighted(f, pts, w)
        count += w.size
    return total, count


def integrate_bulk(f, alpha, dom, levels=1, tol=None, config=DEFAULT_CONFIG, origin_power=0.0):
    """int_dom y^alpha f(z) dz; f maps (N, n+1) points to (N,) values.

    ``origin_power`` s declares f ~ Phi0^{-s} near the origin; the innermost
    radial panel then uses the Jacobi weight rho^{n+alpha-s}, which makes
    exactly homogeneous singularities exact.  Other singular integrands are
    still handled by the geometric panels, at a slower rate.
    """
    if not -1.0 < alpha < 1.0:
        raise QuadratureError("alpha must lie in (-1, 1)")
    if origin_power >= dom.n + alpha + 1.0:
        raise QuadratureError("integrand is not integrable at the origin")
    return _two_level(lambda L: _bulk_rule(f, alpha, dom, L, config, origin_power), levels, tol)


def _trace_rule(g, dom, s, level, cfg, R):
    n = dom.n
    q = cfg.order(level)
    wv, wmu = _angular(dom, level, cfg)
    r, wr = composite_rule(graded_breaks(0.0, R, cfg.radial(level)), q, n - 1.0 - s)
    pts = (r[:, None, None] * wv[None, :, :]).reshape(-1, n)
    w = (wr[:, None] * wmu[None, :]).ravel()
    return _eval_weighted(g, pts, w), w.size


def integrate_trace(g, dom, s, levels=1, tol=None, config=DEFAULT_CONFIG, R=None):
    """int_{H0(x) < R} g(x) / H0(x)^s dx, radial weight r^{n-1-s} exact."""
    if not s < dom.n:
        raise QuadratureError("trace exponent must satisfy s < n")
    R = dom.trace_radius if R is None else float(R)
    return _two_level(lambda L: _trace_rule(g, dom, s, L, config, R), levels, tol)


def integrate_cone_boundary(g, cone, R=None, levels=1, tol=None, config=DEFAULT_CONFIG):
    """int_{H0(x) < R} g(x, tan(theta) H0(x)) / H0(x) dx over the lateral boundary.

    R defaults to the x-radius of the lateral boundary inside the cone domain.
    """
    if cone.kind != DomainKind.CONE:
        raise QuadratureError("integrate_cone_boundary needs a cone domain")
    t = math.tan(cone.theta)
    base = cone.norm.base

    def lifted(x):
        y = t * base.dual(x)
        return g(np.concatenate([x, y[:, None]], axis=1))

    return integrate_trace(lifted, cone, 1.0, levels, tol, config, R)


# ---------------------------------------------------------------------------
# Box rules for compactly supported integrands


def _box_axis(lo, hi, panels, order, power=0.0):
    return composite_rule(np.linspace(lo, hi, panels + 1), order, power)


def box_rule(lo, hi, level, alpha=0.0, order=None):
    """Tensor nodes/weights over the box [lo, hi]; weight y^alpha on the last axis.

    The last axis must start at y = 0 when alpha != 0 so that the Jacobi
    rule absorbs the weight; otherwise the weight is multiplied in.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    q = order or 8
    panels = 2 * 2 ** level
    axes = []
    for i in range(d):
        if i == d - 1 and alpha != 0.0:
            if lo[i] == 0.0:
                axes.append(_box_axis(lo[i], hi[i], panels, q, alpha))
            else:
                x, w = _box_axis(lo[i], hi[i], panels, q)
                axes.append((x, w * x ** alpha))
        else:
            axes.append(_box_axis(lo[i], hi[i], panels, q))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrid = axes[0][1]
    for a in axes[1:]:
        wgrid = np.multiply.outer(wgrid, a[1])
    pts = np.stack([g.ravel() for g in grids], axis=1)
    return pts, wgrid.ravel()


def integrate_box(f, lo, hi, alpha=0.0, levels=1, tol=None, order=None):
    """int_box y^alpha f dz (y = last coordinate) with two-level error."""
    def rule(L):
        pts, w = box_rule(lo, hi, L, alpha, order)
        return _eval_weighted(f, pts, w), w.size

    return _two_level(rule, levels, tol)


# ---------------------------------------------------------------------------
# Meridian-plane integrals for functions of (H0(x), y)


def integrate_meridian(F, n, alpha, r_breaks, y_breaks, levels=1, order=8, tol=None):
    """int int y^alpha r^{n-1} F(r, y) dr dy over the panel tensor.

    F is called with flat arrays (r, y).  The y-panel starting at 0 uses a
    Jacobi rule for y^alpha.  Multiply by omega for the (n+1)-dimensional
    integral of F(H0(x), y).
    """
    r_breaks = np.asarray(r_breaks, dtype=float)
    y_breaks = np.asarray(y_breaks, dtype=float)

    def rule(L):
        q = order + 4 * L
        r, wr = composite_rule(r_breaks, q, (n - 1.0) if r_breaks[0] == 0.0 else 0.0)
        if r_breaks[0] != 0.0:
            wr = wr * r ** (n - 1)
        y0 = y_breaks[0] == 0.0
        y, wy = composite_rule(y_breaks, q, alpha if y0 else 0.0)
        if not y0 and alpha != 0.0:
            wy = wy * y ** alpha
        R, Y = np.meshgrid(r, y, indexing="ij")
        W = np.multiply.outer(wr, wy)
        v = np.asarray(F(R.ravel(), Y.ravel()), dtype=float)
        if not np.all(np.isfinite(v)):
            raise QuadratureError("non-finite integrand sample")
        return stable_sum(v * W.ravel()), W.size

    return _two_level(rule, levels, tol)


def integrate_radial(F, breaks, levels=1, order=10, power=0.0, tol=None):
    """int F(t) (t - t0)^power dt over composite panels, with two-level error."""
    breaks = np.asarray(breaks, dtype=float)

    def rule(L):
        t, w = composite_rule(breaks, order + 4 * L, power)
        v = np.asarray(F(t), dtype=float)
        if not np.all(np.isfinite(v)):
            raise QuadratureError("non-finite integrand sample")
        return stable_sum(v * w), w.size

    return _two_level(rule, levels, tol)


BUMP_T = 2.6


def _bump_axis(c, h, level, order, power, half, graded=0):
    # s = tanh(t) turns the flat edges of exp(-1/(1-s^2)) into fast decay in t
    panels = 2 ** (level + (0 if half else 1))
    if half and graded:
        breaks = graded_breaks(0.0, BUMP_T, graded + 2 * level)
    else:
        breaks = np.linspace(0.0 if half else -BUMP_T, BUMP_T, panels + 1)
    t, w = composite_rule(breaks, order, power if half else 0.0)
    s = np.tanh(t)
    w = w / np.cosh(t) ** 2 * h
    if half and power != 0.0:
        w = w * (s / t) ** power * h ** power
    return c + h * s, w


def bump_rule(center, widths, level, alpha=0.0, order=10, y_axis=True, graded=0):
    """Tensor rule for functions supported in prod [c_i - h_i, c_i + h_i].

    Each axis is mapped through s = tanh(t), t in [-T, T].  With ``y_axis``
    the last coordinate is y: an axis with c = 0 is the half [0, h] and
    carries the Jacobi weight y^alpha (alpha may be any power > -1 here), an
    axis above y = 0 multiplies y^alpha in.  ``graded`` > 0 refines the half
    axis geometrically toward y = 0, for integrands with further fractional
    powers of y.
    """
    c = np.asarray(center, dtype=float)
    h = np.asarray(widths, dtype=float)
    d = c.size
    axes = []
    for i in range(d):
        last = y_axis and i == d - 1
        half = last and c[i] == 0.0
        if last and not half and c[i] - h[i] < 0.0:
            raise QuadratureError("bump support crosses y = 0 without being centred there")
        x, w = _bump_axis(c[i], h[i], level, order, alpha if half else 0.0, half, graded)
        if last and not half and alpha != 0.0:
            w = w * x ** alpha
        axes.append((x, w))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrid = axes[0][1]
    for a in axes[1:]:
        wgrid = np.multiply.outer(wgrid, a[1])
    return np.stack([g.ravel() for g in grids], axis=1), wgrid.ravel()
