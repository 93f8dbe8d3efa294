"""The ground state psi of the weighted Finsler interpolation inequality.

For parameters (n, alpha, b) with beta = (b - n - 1)/2 and
gamma = (2 - alpha - b)/2 the ground state is

    psi(x, y) = Phi0(x, y)^gamma  H0(x)^beta  B(y / H0(x)),

where B solves

    (t + t^3) B'' + [(4 - b) t^2 + alpha] B' + (beta (n + b - 5)/2) t B = 0,
    B(0) = 1,  t^-beta B(t) bounded as t -> infinity.

With z = -t^2 the profile is

    B(t) = F(a1, b1; c1; z) + C2 t^(1 - alpha) F(a2, b2; c2; z)

and for large t it equals L t^beta F(b1, b2; n/2; -1/t^2), which is the part
of the continuation at infinity that survives once C2 cancels the growing
terms.  The second form avoids that cancellation and is used for t >= t_far.

Everything here depends on x only through r = H0(x), so the "meridian"
helpers take (r, y) and the full-space versions compose with the norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .constants import const_K, log_weights
from .finsler_core import LiftedNorm, NormSpec
from .hypergeom import (
    AmbiguousCaseError,
    CaseInfo,
    CaseTag,
    classify_case,
    digamma_fn,
    gamma_fn,
    hyp2f1,
    hyp2f1_derivative,
    pochhammer,
    rgamma,
)


class GroundStateError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemParams:
    n: int
    alpha: float
    b: float

    def __post_init__(self):
        n, a, b = self.n, self.alpha, self.b
        if int(n) != n or n < 1:
            raise GroundStateError("n must be a positive integer")
        if not -1.0 < a < 1.0:
            raise GroundStateError(f"alpha must lie in (-1, 1), got {a}")
        if not (2.0 - a - 1e-12 <= b < n + 1):
            raise GroundStateError(f"need 2 - alpha <= b < n + 1, got b = {b}")
        if n + a <= 1.0:
            raise GroundStateError("need n + alpha > 1")

    @property
    def beta(self):
        return (self.b - self.n - 1.0) / 2.0

    @property
    def gamma_exp(self):
        return (2.0 - self.alpha - self.b) / 2.0

    @property
    def degree(self):
        """Homogeneity degree of psi."""
        return (1.0 - self.alpha - self.n) / 2.0

    @property
    def hardy_coeff(self):
        return (self.alpha + self.b - 2.0) ** 2 / 4.0

    @property
    def K(self):
        return const_K(self.n, self.alpha, self.b)

    def as_tuple(self):
        return (self.n, self.alpha, self.b)


@dataclass(frozen=True)
class HyperParams:
    a1: float
    b1: float
    c1: float
    a2: float
    b2: float
    c2: float
    C2: float
    case1: CaseInfo
    case2: CaseInfo

    @property
    def triples(self):
        return (self.a1, self.b1, self.c1), (self.a2, self.b2, self.c2)


def make_hyper_params(p):
    n, al, b = p.n, p.alpha, p.b
    a1 = (5.0 - n - b) / 4.0
    b1 = (n + 1.0 - b) / 4.0
    c1 = (al + 1.0) / 2.0
    a2 = a1 - c1 + 1.0
    b2 = b1 - c1 + 1.0
    c2 = 2.0 - c1
    C2 = -(gamma_fn(c1) * gamma_fn(b2) * gamma_fn(c2 - a2)
           * rgamma(c2) * rgamma(b1) * rgamma(c1 - a1))
    return HyperParams(a1, b1, c1, a2, b2, c2, C2,
                       classify_case(a1, b1, c1), classify_case(a2, b2, c2))


# ---------------------------------------------------------------------------
# Coefficient of t^beta at infinity


def _infinity_coefficient(info, e):
    """Coefficients (plain, log) of (-z)^-e and ln(-z) (-z)^-e in F at z -> -inf.

    ``e`` must be one of the two parameters a, b of the triple.
    """
    a, b, c = info.a, info.b, info.c
    tag = info.tag
    if tag is CaseTag.CaseIV_polynomial:
        return 0.0, 0.0  # only non-negative powers of -z
    if tag is CaseTag.CaseIV_reflected:
        # F = (1-z)^{-s} Poly_l(z),  s = a + l; expand (1-z)^{-s} = (-z)^{-s} (1 + 1/(-z))^{-s}
        l = info.l
        s = a + l
        shift = s - e
        j0 = round(shift)
        if abs(shift - j0) > 1e-9:
            return 0.0, 0.0
        total = 0.0
        pk = 1.0  # coefficient of z^k in F(-l, c-a; c; z)
        for k in range(l + 1):
            j = k - j0
            if j >= 0:
                total += pk * (-1.0) ** k * pochhammer(s, j) * (-1.0) ** j / math.factorial(j)
            pk *= (-l + k) * (c - a + k) / ((c + k) * (k + 1.0))
        return total, 0.0
    if tag is CaseTag.CaseI:
        if abs(e - b) < abs(e - a):
            a, b = b, a
        return gamma_fn(c) * gamma_fn(b - a) * rgamma(b) * rgamma(c - a), 0.0
    # Case II / III: b = a + m, e must be the larger parameter
    m = info.m
    if abs(e - b) > 1e-9:
        raise GroundStateError("t^beta coefficient sits in the finite sum; not handled")
    pre = (gamma_fn(c) * rgamma(a + m) * rgamma(c - a)
           * pochhammer(a, m) * pochhammer(1.0 - c + a, m) / math.factorial(m))
    psi = digamma_fn(1.0 + m) + digamma_fn(1.0) - digamma_fn(a + m) - digamma_fn(c - a - m)
    return pre * psi, pre


def leading_coefficient_cases(h):
    """L = lim t^-beta B(t) from the continuation formula of each triple.

    Returns (L, log_coefficient); the log coefficient must vanish for the
    C2 of the ground state, which is a useful internal check.
    """
    p1, l1 = _infinity_coefficient(h.case1, h.b1)
    p2, l2 = _infinity_coefficient(h.case2, h.b2)
    return p1 + h.C2 * p2, l1 + h.C2 * l2


def leading_coefficient_closed(p, h):
    """G(c1) G(1-a1) G(b2) sin((1-alpha) pi/2) / (pi G(n/2))."""
    return (gamma_fn(h.c1) * gamma_fn(1.0 - h.a1) * gamma_fn(h.b2)
            * math.sin((1.0 - p.alpha) * math.pi / 2.0) / (math.pi * gamma_fn(p.n / 2.0)))


# ---------------------------------------------------------------------------
# Ground state


def _far_switch(n):
    # relative cancellation in the near form grows like t^(n-2)
    # no cancellation for n <= 2; switch only to keep -t^2 finite
    if n <= 2:
        return 1e6
    return max(2.0, 10.0 ** (4.0 / (n - 2)))


@dataclass(frozen=True, eq=False)
class GroundState:
    params: ProblemParams
    hyper: HyperParams
    norm: LiftedNorm
    L: float
    L_method: str
    t_far: float = field(default=math.inf)

    @classmethod
    def build(cls, n, alpha, b, norm=None, t_far=None):
        p = ProblemParams(n, alpha, b)
        h = make_hyper_params(p)
        if norm is None:
            norm = NormSpec.euclidean(n)
        if isinstance(norm, NormSpec):
            norm = LiftedNorm(norm)
        if norm.base.dim != n:
            raise GroundStateError("norm dimension does not match n")
        try:
            L, logc = leading_coefficient_cases(h)
            method = "continuation"
            if abs(logc) > 1e-8 * max(1.0, abs(L)):
                raise GroundStateError("log terms do not cancel")
        except (GroundStateError, AmbiguousCaseError):
            L, method = leading_coefficient_closed(p, h), "closed-form"
        return cls(p, h, norm, L, method, _far_switch(n) if t_far is None else t_far)

    @property
    def K(self):
        return self.params.K

    # -- profile B ----------------------------------------------------------

    def B_near(self, t):
        t = np.asarray(t, dtype=float)
        h = self.hyper
        z = -t * t
        return hyp2f1(h.a1, h.b1, h.c1, z) + h.C2 * t ** (1.0 - self.params.alpha) * hyp2f1(h.a2, h.b2, h.c2, z)

    def B_prime_near(self, t):
        t = np.asarray(t, dtype=float)
        h = self.hyper
        al = self.params.alpha
        z = -t * t
        d1 = -2.0 * t * hyp2f1_derivative(h.a1, h.b1, h.c1, z)
        d2 = ((1.0 - al) * t ** (-al) * hyp2f1(h.a2, h.b2, h.c2, z)
              - 2.0 * t ** (2.0 - al) * hyp2f1_derivative(h.a2, h.b2, h.c2, z))
        return d1 + h.C2 * d2

    def B_far(self, t):
        t = np.asarray(t, dtype=float)
        h = self.hyper
        return self.L * t ** self.params.beta * hyp2f1(h.b1, h.b2, self.params.n / 2.0, -1.0 / (t * t))

    def B_prime_far(self, t):
        t = np.asarray(t, dtype=float)
        h = self.hyper
        be = self.params.beta
        w = -1.0 / (t * t)
        c = self.params.n / 2.0
        return self.L * (be * t ** (be - 1.0) * hyp2f1(h.b1, h.b2, c, w)
                         + 2.0 * t ** (be - 3.0) * hyp2f1_derivative(h.b1, h.b2, c, w))

    def _split(self, t, near, far):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise GroundStateError("B is defined for t >= 0")
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.empty_like(t)
        f = t >= self.t_far
        if np.any(~f):
            out[~f] = near(t[~f])
        if np.any(f):
            out[f] = far(t[f])
        return float(out[0]) if scalar else out

    def B(self, t):
        return self._split(t, self.B_near, self.B_far)

    def B_prime(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise GroundStateError("B' is evaluated for t > 0 only")
        return self._split(t, self.B_prime_near, self.B_prime_far)

    # -- meridian form: V(r, y) = r^beta B(y/r) ------------------------------

    def _V(self, r, y, derivs):
        r, y = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(y, dtype=float))
        r = np.atleast_1d(r).astype(float)
        y = np.atleast_1d(y).astype(float)
        be = self.params.beta
        h = self.hyper
        V = np.empty_like(r)
        Vr = np.empty_like(r)
        Vy = np.empty_like(r)
        # on the axis r = 0 only the far form is defined
        far = (y > 0) & ((r == 0) | (y >= self.t_far * r))
        near = ~far
        if np.any(near):
            rr, yy = r[near], y[near]
            if np.any(rr <= 0):
                raise GroundStateError("x = 0 reached the near branch")
            t = yy / rr
            B = self.B_near(t)
            V[near] = rr ** be * B
            if derivs:
                Bp = np.zeros_like(t)
                pos = t > 0
                Bp[pos] = self.B_prime_near(t[pos])
                Vr[near] = be * rr ** (be - 1.0) * B - rr ** (be - 2.0) * yy * Bp
                Vy[near] = rr ** (be - 1.0) * Bp
        if np.any(far):
            rr, yy = r[far], y[far]
            c = self.params.n / 2.0
            w = -(rr / yy) ** 2
            G = hyp2f1(h.b1, h.b2, c, w)
            V[far] = self.L * yy ** be * G
            if derivs:
                dG = hyp2f1_derivative(h.b1, h.b2, c, w)
                Vr[far] = self.L * yy ** be * dG * (-2.0 * rr / yy ** 2)
                Vy[far] = self.L * (be * yy ** (be - 1.0) * G + yy ** be * dG * (2.0 * rr * rr / yy ** 3))
        return V, Vr, Vy

    def meridian(self, r, y, derivs=True):
        """psi and its partials as functions of r = H0(x) and y.

        Returns (U, U_r, U_y); U_r = M1 and U_y = M2 so that
        grad psi = (M1 grad H0(x), M2).
        """
        shape = np.broadcast(np.asarray(r), np.asarray(y)).shape
        V, Vr, Vy = self._V(r, y, derivs)
        r = np.broadcast_to(np.asarray(r, dtype=float), shape).ravel()
        y = np.broadcast_to(np.asarray(y, dtype=float), shape).ravel()
        if np.any((r == 0) & (y == 0)):
            raise GroundStateError("psi is singular at the origin")
        g = self.params.gamma_exp
        phi2 = r * r + y * y
        A = phi2 ** (g / 2.0)
        U = A * V
        if not derivs:
            return U.reshape(shape)
        dA = g * phi2 ** (g / 2.0 - 1.0)
        Ur = dA * r * V + A * Vr
        Uy = dA * y * V + A * Vy
        return U.reshape(shape), Ur.reshape(shape), Uy.reshape(shape)

    # -- full-space evaluators ---------------------------------------------

    def _split_z(self, z):
        z = np.asarray(z, dtype=float)
        n = self.params.n
        if z.shape[-1] != n + 1:
            raise GroundStateError(f"points must have {n + 1} coordinates")
        x, y = z[..., :n], z[..., n]
        if np.any(y < 0):
            raise GroundStateError("points must lie in the closed upper half-space")
        return x, y

    def psi(self, z):
        x, y = self._split_z(z)
        return self.meridian(self.norm.base.dual(x), y, derivs=False)

    def psi_gradient(self, z):
        """(M1 grad H0(x), M2); needs x != 0."""
        x, y = self._split_z(z)
        r = self.norm.base.dual(x)
        if np.any(r == 0):
            raise GroundStateError("the gradient formula needs x != 0")
        _, M1, M2 = self.meridian(r, y)
        gx = self.norm.base.dual_gradient(x) * np.asarray(M1)[..., None]
        return np.concatenate([gx, np.asarray(M2)[..., None]], axis=-1)

    def psi_k(self, k, D, z):
        """psi * P_k(Phi0 / D)^(-1/2)."""
        psi = self.psi(z)
        if k == 0:
            return psi
        rho = self.norm.dual(z) / D
        if np.any(rho >= 1.0):
            raise GroundStateError("psi_k needs Phi0(z) < D")
        _, P, _ = log_weights(k, rho)
        return psi / np.sqrt(P[-1])

    def psi_k_gradient(self, k, D, z):
        """P_k^-1/2 [grad psi - psi S_k grad Phi0 / (2 Phi0)]."""
        g = self.psi_gradient(z)
        if k == 0:
            return g
        psi = self.psi(z)
        phi0 = self.norm.dual(z)
        rho = phi0 / D
        if np.any(rho >= 1.0):
            raise GroundStateError("psi_k needs Phi0(z) < D")
        _, P, S = log_weights(k, rho)
        gphi = self.norm.dual_gradient(z)
        corr = (0.5 * psi * S / phi0)[..., None] * gphi
        return (g - corr) / np.sqrt(P[-1])[..., None]


def B_eval(gs, t):
    return gs.B(t)


def B_prime_eval(gs, t):
    return gs.B_prime(t)


def psi_eval(gs, z):
    return gs.psi(z)


def psi_gradient(gs, z):
    return gs.psi_gradient(z)


def psi_k_eval(gs, k, D, z):
    return gs.psi_k(k, D, z)


# ---------------------------------------------------------------------------
# ODE oracle


@dataclass
class OdeOracle:
    t: np.ndarray
    B: np.ndarray
    B_prime: np.ndarray
    L: float
    normalization_mismatch: float
    sol: object = field(repr=False)
    scale: float = field(repr=False)

    def second_derivative(self, t, h=1e-4):
        s = np.log(np.asarray(t, dtype=float))
        y = self.sol.sol(s)
        ys = self.sol.sol(s + h)[1]
        ym = self.sol.sol(s - h)[1]
        Bss = (ys - ym) / (2 * h)
        tt = np.exp(s)
        return (Bss - y[1]) / (tt * tt) / self.scale


def _far_series(p, T, terms=6):
    """t^beta sum d_j t^-2j and its derivative at t = T (d_0 = 1)."""
    be = p.beta
    kappa = be * (p.n + p.b - 5.0) / 2.0
    P = lambda m: m * (m - 1.0) + (4.0 - p.b) * m + kappa  # noqa: E731
    Q = lambda m: m * (m - 1.0) + p.alpha * m  # noqa: E731
    d = [1.0]
    for j in range(1, terms):
        d.append(-d[-1] * Q(be - 2 * j + 2) / P(be - 2 * j))
    B = sum(dj * T ** (be - 2 * j) for j, dj in enumerate(d))
    Bp = sum(dj * (be - 2 * j) * T ** (be - 2 * j - 1) for j, dj in enumerate(d))
    return B, Bp


def ode_oracle(p, t_grid, T=1e3, t_min=1e-5, rtol=1e-13):
    """Solve the profile ODE from t = T inward, independently of any 2F1.

    In s = ln t the equation reads
        B_ss = B_s - ([(4-b) t^2 + alpha] B_s + kappa t^2 B) / (1 + t^2),
    kappa = beta (n + b - 5)/2.  The start values at T come from the series
    t^beta (1 + d_1 t^-2 + ...) of the solution bounded by t^beta.  Near 0
    the solution is Y0 + c t^(1-alpha) + O(t^2); fitting Y0 at the two
    smallest points gives the normalisation B(0) = 1 and L = 1 / Y0.
    """
    if isinstance(p, GroundState):
        p = p.params
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise GroundStateError("t_grid must be increasing")
    if t_grid[0] < 10 * t_min or t_grid[-1] > T:
        raise GroundStateError("t_grid must lie inside [10 t_min, T]")
    al, b = p.alpha, p.b
    kappa = p.beta * (p.n + b - 5.0) / 2.0

    def rhs(s, u):
        t2 = math.exp(2.0 * s)
        B, Bs = u
        return [Bs, Bs - (((4.0 - b) * t2 + al) * Bs + kappa * t2 * B) / (1.0 + t2)]

    B0, Bp0 = _far_series(p, T)
    s0, s1 = math.log(T), math.log(t_min)
    sol = solve_ivp(rhs, (s0, s1), [B0, T * Bp0], method="DOP853", rtol=rtol,
                    atol=1e-300, dense_output=True)
    if not sol.success:
        raise GroundStateError(f"ODE integration failed: {sol.message}")
    ta, tb, tc = t_min, 2 * t_min, 4 * t_min
    ya, yb, yc = (sol.sol(math.log(v))[0] for v in (ta, tb, tc))
    q = 1.0 - al
    c = (yb - ya) / (tb ** q - ta ** q)
    Y0 = ya - c * ta ** q
    mismatch = abs(Y0 + c * tc ** q - yc) / abs(Y0)
    if mismatch > 1e-6:
        raise GroundStateError(f"normalisation fit is inconsistent ({mismatch:.2e})")
    u = sol.sol(np.log(t_grid))
    return OdeOracle(t_grid, u[0] / Y0, u[1] / t_grid / Y0, 1.0 / Y0, mismatch, sol, Y0)


def ode_oracle_B(p, t_grid, **kw):
    return ode_oracle(p, t_grid, **kw).B


def profile_ode_residual(p, t, B, Bp, Bpp):
    """Residual of the profile ODE divided by its largest term."""
    kappa = p.beta * (p.n + p.b - 5.0) / 2.0
    terms = [(t + t ** 3) * Bpp, ((4.0 - p.b) * t * t + p.alpha) * Bp, kappa * t * B]
    scale = np.max(np.abs(terms), axis=0)
    return np.abs(sum(terms)) / scale


def substitution_residual(p, t, B, Bp, Bpp):
    """Residual of the ODE for g = (1+t^2)^b1 B, divided by its largest term.

    t (1+t^2)^2 g'' + [alpha + (3-n) t^2](1+t^2) g' + (n+1-b)(3-n-2 alpha-b)/4 t g = 0.
    """
    n, al, b = p.n, p.alpha, p.b
    b1 = (n + 1.0 - b) / 4.0
    w = 1.0 + t * t
    g = w ** b1 * B
    gp = w ** b1 * Bp + 2.0 * b1 * t * w ** (b1 - 1.0) * B
    gpp = (w ** b1 * Bpp + 4.0 * b1 * t * w ** (b1 - 1.0) * Bp
           + 2.0 * b1 * w ** (b1 - 1.0) * B + 4.0 * b1 * (b1 - 1.0) * t * t * w ** (b1 - 2.0) * B)
    terms = [t * w * w * gpp, (al + (3.0 - n) * t * t) * w * gp, (n + 1 - b) * (3 - n - 2 * al - b) / 4.0 * t * g]
    scale = np.max(np.abs(terms), axis=0)
    return np.abs(sum(terms)) / scale


# ---------------------------------------------------------------------------
# PDE and boundary residuals


def _flux(gs, k, D, z):
    """y^alpha Phi(grad u) grad_zeta Phi(grad u), built from the generic norm."""
    n = gs.params.n
    g = gs.psi_k_gradient(k, D, z)
    xi, eta = g[..., :n], g[..., n]
    base = gs.norm.base
    H = base.value(xi)
    HgH = np.where(H[..., None] > 0, H[..., None] * base.gradient(np.where(H[..., None] > 0, xi, 1.0)), 0.0)
    ya = z[..., n] ** gs.params.alpha
    return np.concatenate([HgH, eta[..., None]], axis=-1) * ya[..., None]


def _divergence(gs, k, D, z, h):
    n1 = z.size
    total = 0.0
    for i in range(n1):
        e = np.zeros(n1)
        e[i] = h
        fp = _flux(gs, k, D, (z + e)[None])[0, i]
        fm = _flux(gs, k, D, (z - e)[None])[0, i]
        total += (fp - fm) / (2 * h)
    return total


def pde_residual(gs, k, z, h=None, D=1.0, richardson=True):
    """div(y^a Phi(grad u) grad Phi(grad u)) + zero-order terms at one point.

    The divergence is taken by central differences with step h (default
    1e-3 min(H0(x), y)); with ``richardson`` the steps h and h/2 are
    combined to cancel the h^2 term.
    """
    z = np.asarray(z, dtype=float)
    n = gs.params.n
    x, y = z[:n], z[n]
    r = float(gs.norm.base.dual(x))
    if y <= 0 or r <= 0:
        raise GroundStateError("pde_residual needs x != 0 and y > 0")
    if h is None:
        h = 1e-3 * min(r, y)
    if h >= 0.5 * min(r, y):
        raise GroundStateError("step too large for the distance to the coordinate planes")
    div = _divergence(gs, k, D, z, h)
    if richardson:
        div = (4.0 * _divergence(gs, k, D, z, h / 2) - div) / 3.0
    u = float(gs.psi_k(k, D, z))
    phi0 = float(gs.norm.dual(z))
    zero = gs.params.hardy_coeff * y ** gs.params.alpha * u / phi0 ** 2
    if k:
        _, P, _ = log_weights(k, phi0 / D)
        zero += y ** gs.params.alpha * u / (4 * phi0 ** 2) * float(np.sum(P ** 2))
    return float(div + zero)


def pde_residual_stencil(gs, z, h=None):
    """k = 0 residual via y^a (Laplacian psi) + a y^(a-1) psi_y; Euclidean norm only."""
    if gs.norm.base.family != "euclidean":
        raise GroundStateError("the stencil path is the Euclidean reduction")
    z = np.asarray(z, dtype=float)
    n1 = z.size
    y = z[-1]
    r = float(np.linalg.norm(z[:-1]))
    if h is None:
        h = 1e-3 * min(r, y)

    def lap(hh):
        c = float(gs.psi(z))
        s = 0.0
        for i in range(n1):
            e = np.zeros(n1)
            e[i] = hh
            s += float(gs.psi(z + e)) + float(gs.psi(z - e)) - 2 * c
        return s / hh ** 2

    L = (4 * lap(h / 2) - lap(h)) / 3
    al = gs.params.alpha
    psi_y = float(gs.psi_gradient(z)[-1])
    u = float(gs.psi(z))
    return float(y ** al * L + al * y ** (al - 1) * psi_y + gs.params.hardy_coeff * y ** al * u / (r * r + y * y))


def bc_residual(gs, k, x, y_probe, D=1.0):
    """y^a d_y psi_k(x, y_probe) + K psi_k(x, 0) / H0(x)^(1-a).

    Tends to zero like y_probe^(1 + alpha) (for alpha < 1).
    """
    x = np.asarray(x, dtype=float)
    r = float(gs.norm.base.dual(x))
    if r == 0:
        raise GroundStateError("x = 0 is excluded")
    al = gs.params.alpha
    zp = np.append(x, y_probe)
    z0 = np.append(x, 0.0)
    dy = float(gs.psi_k_gradient(k, D, zp)[-1])
    return y_probe ** al * dy + gs.K * float(gs.psi_k(k, D, z0)) / r ** (1 - al)


def bc_residual_extrapolated(gs, k, x, y_probe, D=1.0):
    """Richardson limit of bc_residual from y_probe and y_probe/2 at order 1 + alpha."""
    q = 2.0 ** (1.0 + gs.params.alpha)
    r1 = bc_residual(gs, k, x, y_probe, D)
    r2 = bc_residual(gs, k, x, y_probe / 2, D)
    return (q * r2 - r1) / (q - 1.0)


def slope_limit(gs, t_list=(1e-3, 1e-4, 1e-5, 1e-6)):
    """Extrapolated lim_{t -> 0} -t^a B'(t), which should equal K.

    Near 0, -t^a B'(t) = K + c t^(1+a) + O(t^2); consecutive samples are
    combined to cancel the t^(1+a) term.  Returns (limit, raw values).
    """
    al = gs.params.alpha
    t = np.asarray(t_list, dtype=float)
    if np.any(np.diff(t) >= 0):
        raise GroundStateError("t_list must be decreasing")
    raw = -t ** al * np.asarray(gs.B_prime(t), dtype=float)
    q = (t[:-1] / t[1:]) ** (1.0 + al)
    ext = (q * raw[1:] - raw[:-1]) / (q - 1.0)
    return float(ext[-1]), raw
