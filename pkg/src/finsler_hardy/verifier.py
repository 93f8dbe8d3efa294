"""Deficits of the trace-Hardy inequalities for compactly supported test functions.

For u supported in a bounded domain U of the closed upper half-space

    deficit = int y^a Phi(grad u)^2
              - K int u(x,0)^2 / H0(x)^(1-a) dx
              - (a+b-2)^2/4 int y^a u^2 / Phi0^2
              - 1/4 sum_{i<=k} int y^a P_i(Phi0/D)^2 u^2 / Phi0^2,

which is non-negative.  On the cone {y > tan(t) H0(x)} (a = 0) the trace is
taken on the lateral boundary with the constant K_t.

Test functions are products of one-dimensional bumps, so every integral is
taken over the support box with a tensor Gauss rule (Jacobi in y when the
box touches y = 0).  The same nodes carry all terms, and the Picone
integrand f(u, psi_k), whose integral equals the deficit.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import const_K_theta, log_weights
from .finsler_core import LiftedNorm, NormSpec
from .ground_state import GroundState, ProblemParams
from .quadrature import DomainKind, QuadratureError, bump_rule, stable_sum

THREADS_ENV = "FINSLER_HARDY_THREADS"
SUPPORT_MARGIN = 0.05
PICONE_GRADING = 8


def thread_count():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """Map in parallel when the thread env var asks for it; output keeps input order."""
    items = list(items)
    t = thread_count()
    if t == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=t) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# Test functions


def bump(s):
    """e * exp(-1/(1-s^2)) on |s| < 1 (peak value 1) and its derivative."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    q = np.where(inside, 1.0 - s * s, 1.0)
    v = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
    dv = np.where(inside, v * (-2.0 * s / (q * q)), 0.0)
    return v, dv


@dataclass(frozen=True)
class TestFunction:
    """u = A prod_i bump((q_i - c_i) / h_i) in integration coordinates q.

    For ``frame == "half_space"`` q = (x, y).  For ``frame == "cone"`` q = (x, s)
    with y = tan(theta) H0(x) + s, so s = 0 is the lateral boundary.  A centre
    with last coordinate 0 gives a bump that touches that boundary (its even
    extension is smooth, so u is C-infinity up to the boundary).
    """

    __test__ = False

    center: tuple
    widths: tuple
    amplitude: float = 1.0
    frame: str = "half_space"
    theta: float = 0.0
    norm: NormSpec | None = None
    smoothness: str = "C_inf"

    @property
    def dim(self):
        return len(self.center)

    @property
    def touches_boundary(self):
        return self.center[-1] == 0.0

    def support_box(self):
        c = np.asarray(self.center, dtype=float)
        h = np.asarray(self.widths, dtype=float)
        lo, hi = c - h, c + h
        lo[-1] = max(lo[-1], 0.0)
        return lo, hi

    def scaled(self, lam):
        return replace(self, amplitude=self.amplitude * lam)

    def _box_values(self, q):
        c = np.asarray(self.center)
        h = np.asarray(self.widths)
        s = (q - c) / h
        v, dv = bump(s)
        d = self.dim
        val = self.amplitude * np.prod(v, axis=1)
        grad = np.empty_like(q)
        for i in range(d):
            others = np.prod(np.delete(v, i, axis=1), axis=1)
            grad[:, i] = self.amplitude * dv[:, i] / h[i] * others
        return val, grad

    def to_physical(self, q):
        if self.frame == "half_space":
            return q
        x = q[:, :-1]
        y = math.tan(self.theta) * self.norm.dual(x) + q[:, -1]
        return np.concatenate([x, y[:, None]], axis=1)

    def evaluate(self, q):
        """(z, u, grad u) at integration points q; grad is in physical coordinates."""
        q = np.atleast_2d(np.asarray(q, dtype=float))
        val, g = self._box_values(q)
        if self.frame == "half_space":
            return q, val, g
        x = q[:, :-1]
        gh = self.norm.dual_gradient(x)
        gx = g[:, :-1] - math.tan(self.theta) * g[:, -1:] * gh
        return self.to_physical(q), val, np.concatenate([gx, g[:, -1:]], axis=1)

    def _to_box(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if self.frame == "half_space":
            return z
        x = z[:, :-1]
        s = z[:, -1] - math.tan(self.theta) * self.norm.dual(x)
        return np.concatenate([x, s[:, None]], axis=1)

    def value(self, z):
        q = self._to_box(z)
        inside = q[:, -1] >= 0
        return np.where(inside, self._box_values(q)[0], 0.0)

    def gradient(self, z):
        q = self._to_box(z)
        return self.evaluate(q)[2]

    def describe(self):
        return {"center": list(self.center), "widths": list(self.widths),
                "amplitude": self.amplitude, "frame": self.frame}


def _box_vertices(lo, hi):
    d = lo.size
    idx = np.array(np.meshgrid(*[[0, 1]] * d, indexing="ij")).reshape(d, -1).T
    return np.where(idx == 1, hi, lo)


def support_inside(u, dom, margin=SUPPORT_MARGIN):
    """True when the support box lies inside dom with the given Phi0 margin.

    Phi0 is convex in the integration coordinates of both frames, so the
    vertices of the box bound it.
    """
    lo, hi = u.support_box()
    z = u.to_physical(_box_vertices(lo, hi))
    base = dom.norm.base
    if dom.kind == DomainKind.CYLINDER:
        return bool(np.all(base.dual(z[:, :-1]) <= dom.R - margin) and np.all(z[:, -1] <= dom.R_y - margin))
    return bool(np.all(dom.norm.dual(z) <= dom.R - margin))


def bump_corpus(dom, count, seed, touch_fraction=0.5, margin=SUPPORT_MARGIN):
    """Seeded corpus of bumps supported in dom.

    Boxes touching the boundary where a trace is taken keep x = 0 outside
    their x-range, so the trace weight stays bounded on the support; on the
    cone every box avoids x = 0 because u depends on H0(x) there.
    """
    rng = np.random.default_rng(seed)
    n = dom.n
    cone = dom.kind == DomainKind.CONE
    R = dom.R if dom.kind != DomainKind.CYLINDER else min(dom.R, dom.R_y)
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 200 * count:
            raise QuadratureError("could not place bumps inside the domain")
        hx = rng.uniform(0.06, 0.25, n) * R
        hy = rng.uniform(0.06, 0.25) * R
        cx = rng.uniform(-0.7, 0.7, n) * R
        touch = rng.random() < touch_fraction
        cy = 0.0 if touch else rng.uniform(hy + 0.02 * R, 0.7 * R)
        amp = rng.uniform(0.5, 2.0)
        if (touch or cone) and np.all(np.abs(cx) < hx):
            continue
        if cone:
            u = TestFunction(tuple(np.append(cx, cy)), tuple(np.append(hx, hy)), amp,
                             "cone", dom.theta, dom.norm.base)
        else:
            u = TestFunction(tuple(np.append(cx, cy)), tuple(np.append(hx, hy)), amp)
        if support_inside(u, dom, margin):
            out.append(u)
    return out


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class DeficitReport:
    energy: float
    trace_term: float
    hardy_term: float
    remainder_terms: tuple
    deficit: float
    quadrature_error: float
    hardy_structural_zero: bool = False
    picone: float | None = None
    picone_error: float | None = None
    node_count: int = 0
    coefficients: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.deficit + self.quadrature_error >= 0.0

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"

    @property
    def picone_gap(self):
        if self.picone is None:
            return None
        return abs(self.deficit - self.picone)

    def as_dict(self):
        d = {
            "energy": self.energy,
            "trace_term": self.trace_term,
            "hardy_term": self.hardy_term,
            "remainder_terms": list(self.remainder_terms),
            "deficit": self.deficit,
            "quadrature_error": self.quadrature_error,
            "hardy_structural_zero": self.hardy_structural_zero,
            "node_count": self.node_count,
            "coefficients": dict(self.coefficients),
            "verdict": self.verdict,
        }
        if self.picone is not None:
            d["picone"] = self.picone
            d["picone_error"] = self.picone_error
        return d


ZERO_REPORT_FIELDS = dict(energy=0.0, trace_term=0.0, hardy_term=0.0, deficit=0.0, quadrature_error=0.0)


def _picone_density(gs, k, D, z, u, gu):
    """f(u, psi_k) = Phi(grad u)^2 + (u/psi)^2 Phi(grad psi)^2 - 2 (u/psi) <grad u, Phi grad Phi(grad psi)>."""
    n = gs.params.n
    base = gs.norm.base
    psi = gs.psi_k(k, D, z)
    gp = gs.psi_k_gradient(k, D, z)
    xi, eta = gp[:, :n], gp[:, n]
    H = base.value(xi)
    HgH = H[:, None] * base.gradient(xi)
    phi_u2 = base.value(gu[:, :n]) ** 2 + gu[:, n] ** 2
    ratio = u / psi
    cross = np.einsum("ij,ij->i", gu[:, :n], HgH) + gu[:, n] * eta
    return phi_u2 + ratio ** 2 * (H ** 2 + eta ** 2) - 2.0 * ratio * cross


def _collect(u, lifted, alpha, k, D, level, order, gs, frame_k, trace_weight):
    """Weighted sums of all report densities at one refinement level."""
    pts, w = bump_rule(u.center, u.widths, level, alpha, order)
    z, val, grad = u.evaluate(pts)
    n = lifted.base.dim
    base = lifted.base
    phi0 = lifted.dual(z)
    en = base.value(grad[:, :n]) ** 2 + grad[:, n] ** 2
    u2 = val * val / (phi0 * phi0)
    sums = {"energy": stable_sum(en * w), "hardy": stable_sum(u2 * w)}
    rem = []
    if k:
        _, P, _ = log_weights(k, phi0 / D)
        for i in range(k):
            rem.append(stable_sum(P[i] ** 2 * u2 * w))
    sums["rem"] = rem
    if gs is not None:
        # psi_y ~ y^-alpha, so the density behaves like y^-|alpha| at y = 0
        a2 = abs(alpha)
        ppts, pw = bump_rule(u.center, u.widths, level, -a2, order, graded=PICONE_GRADING)
        pz, pv, pg = u.evaluate(ppts)
        dens = _picone_density(gs, frame_k, D, pz, pv, pg) * pz[:, -1] ** (alpha + a2)
        sums["picone"] = stable_sum(dens * pw)
    sums["trace"] = 0.0
    if u.touches_boundary:
        tpts, tw = bump_rule(u.center[:-1], u.widths[:-1], level, 0.0, order, y_axis=False)
        q = np.concatenate([tpts, np.zeros((tpts.shape[0], 1))], axis=1)
        zt, vt, _ = u.evaluate(q)
        sums["trace"] = stable_sum(vt * vt * trace_weight(zt[:, :-1]) * tw)
    return sums, w.size


def _assemble(u, lifted, alpha, k, D, levels, order, gs, K, hardy_coeff, trace_weight, picone):
    if u.amplitude == 0.0:
        return DeficitReport(remainder_terms=(0.0,) * k, hardy_structural_zero=hardy_coeff == 0.0,
                             picone=0.0 if picone else None, picone_error=0.0 if picone else None,
                             **ZERO_REPORT_FIELDS)
    lo_s, n_lo = _collect(u, lifted, alpha, k, D, levels, order, gs if picone else None, k, trace_weight)
    hi_s, n_hi = _collect(u, lifted, alpha, k, D, levels + 1, order, gs if picone else None, k, trace_weight)

    def pair(key, c=1.0):
        return c * hi_s[key], abs(c) * abs(hi_s[key] - lo_s[key])

    energy, e_err = pair("energy")
    trace, t_err = pair("trace", K)
    if hardy_coeff == 0.0:
        hardy, h_err = 0.0, 0.0
    else:
        hardy, h_err = pair("hardy", hardy_coeff)
    rem = tuple(0.25 * v for v in hi_s["rem"])
    r_err = sum(0.25 * abs(a - b) for a, b in zip(hi_s["rem"], lo_s["rem"]))
    deficit = energy - trace - hardy - math.fsum(rem)
    err = e_err + t_err + h_err + r_err
    pic = pic_err = None
    if picone:
        pic = hi_s["picone"]
        pic_err = abs(hi_s["picone"] - lo_s["picone"])
    return DeficitReport(energy, trace, hardy, rem, deficit, err, hardy_coeff == 0.0, pic, pic_err,
                         n_lo + n_hi, {"K": K, "hardy": hardy_coeff, "D": D})


def _check_support(u, dom):
    if not support_inside(u, dom, 0.0):
        raise QuadratureError("test function support is not inside the domain")


def deficit_series(u, p, norm, dom, k, levels=0, order=10, picone=False):
    """Deficit of the k-term improved inequality on dom (D = sup Phi0 over dom)."""
    if not isinstance(p, ProblemParams):
        p = ProblemParams(*p)
    if dom.kind == DomainKind.CONE:
        raise QuadratureError("use deficit_cone for cone domains")
    if u.frame != "half_space":
        raise QuadratureError("half-space deficits need half-space test functions")
    lifted = norm if isinstance(norm, LiftedNorm) else LiftedNorm(norm)
    _check_support(u, dom)
    gs = GroundState.build(p.n, p.alpha, p.b, lifted) if picone else None
    al = p.alpha
    base = lifted.base

    def tw(x):
        return base.dual(x) ** (al - 1.0)

    return _assemble(u, lifted, al, k, dom.D, levels, order, gs, p.K, p.hardy_coeff, tw, picone)


def deficit_interpolation(u, p, norm, dom, levels=0, order=10, picone=False):
    """Deficit of the interpolation inequality: energy - K trace - Hardy."""
    return deficit_series(u, p, norm, dom, 0, levels, order, picone)


def deficit_cone(u, n, b, theta, norm, dom, k=0, levels=0, order=10, picone=False):
    """Deficit on the cone {y > tan(theta) H0(x)} with the lateral trace constant K_theta."""
    if dom.kind != DomainKind.CONE or abs(dom.theta - theta) > 1e-15:
        raise QuadratureError("deficit_cone needs the matching cone domain")
    if u.frame != "cone":
        raise QuadratureError("cone deficits need cone-frame test functions")
    lifted = norm if isinstance(norm, LiftedNorm) else LiftedNorm(norm)
    _check_support(u, dom)
    p = ProblemParams(n, 0.0, b)
    Kt = const_K_theta(n, b, theta).value
    gs = GroundState.build(n, 0.0, b, lifted) if picone else None
    base = lifted.base

    def tw(x):
        return 1.0 / base.dual(x)

    return _assemble(u, lifted, 0.0, k, dom.D, levels, order, gs, Kt, p.hardy_coeff, tw, picone)


def zero_function(dim, frame="half_space", theta=0.0, norm=None):
    """u = 0, as an amplitude-zero bump."""
    c = tuple([0.3] * (dim - 1) + [0.0])
    return TestFunction(c, tuple([0.1] * dim), 0.0, frame, theta, norm)
