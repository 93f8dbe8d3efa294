"""Near-optimizer sequences that exhibit the sharpness of the constants.

All sequences here are functions of (H0(x), y) only.  For such u the
anisotropic gradient reduces to the meridian one,

    Phi(grad u)^2 = u_r^2 + u_y^2,   r = H0(x),

because H(grad H0(x)) = 1, so every integral is omega times a two-dimensional
meridian integral with weight y^alpha r^(n-1).  omega cancels in quotients;
it is kept in the absolute quantities that are reported.

When u = psi_k w(Phi0) the Picone density is psi_k^2 w'^2, and since psi is
homogeneous of degree (1-n-alpha)/2 its angular part factors out:

    int y^a f(u, psi_k) = omega A int_0 rho w'(rho)^2 / P_k d rho,
    A = int_0^{pi/2} psi(cos p, sin p)^2 sin(p)^a cos(p)^(n-1) dp.

The remainder and weight-power quotients therefore reduce to one-dimensional
integrals, which are taken in the logarithmic variables X_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import log_weights
from .finsler_core import LiftedNorm, NormSpec, wulff_perimeter
from .ground_state import GroundState, ProblemParams
from .hypergeom import gamma_fn
from .quadrature import (
    DomainKind,
    QuadratureError,
    QuadratureResult,
    composite_rule,
    graded_breaks,
    integrate_meridian,
    integrate_radial,
    stable_sum,
)
from .verifier import ordered_map

TRANSITION_RATIO = 2.0
ANGULAR_ORDER = 24


def smoothstep(s):
    """Quintic 10s^3 - 15s^4 + 6s^5 clamped to [0, 1], with its derivative."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s), 30.0 * s * s * (1.0 - s) ** 2


def cutoff(t, inner=1.0, outer=2.0):
    """1 on [0, inner], 0 beyond outer, quintic in between; returns (eta, eta')."""
    s, ds = smoothstep((np.asarray(t, dtype=float) - inner) / (outer - inner))
    return 1.0 - s, -ds / (outer - inner)


def _lifted(norm, n):
    if norm is None:
        norm = NormSpec.euclidean(n)
    return norm if isinstance(norm, LiftedNorm) else LiftedNorm(norm)


def _params(p):
    return p if isinstance(p, ProblemParams) else ProblemParams(*p)


@dataclass(frozen=True)
class SweepRow:
    control_parameter: object
    quotient: float
    target: float
    error: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def rel_gap(self):
        return abs(self.quotient - self.target) / abs(self.target) if self.target else abs(self.quotient)


@dataclass(frozen=True)
class SweepResult:
    name: str
    rows: tuple
    meta: dict = field(default_factory=dict)

    @property
    def quotients(self):
        return [r.quotient for r in self.rows]

    @property
    def gaps(self):
        return [abs(r.quotient - r.target) for r in self.rows]

    def monotone_toward_target(self):
        g = self.gaps
        return all(b < a for a, b in zip(g, g[1:]))

    def strictly_decreasing(self):
        q = self.quotients
        return all(b < a for a, b in zip(q, q[1:]))


def angular_constant(gs, order=40):
    """A = int_0^{pi/2} psi(cos p, sin p)^2 sin^a cos^{n-1} dp (psi at Phi0 = 1)."""
    n, al = gs.params.n, gs.params.alpha
    phi, w = composite_rule(np.array([0.0, math.pi / 4, math.pi / 2]), order, al)
    if al != 0.0:
        w = w * (np.sin(phi) / phi) ** al
    U = gs.meridian(np.cos(phi), np.sin(phi), derivs=False)
    return stable_sum(w * U * U * np.cos(phi) ** (n - 1))


def surface_constant(n, alpha, omega):
    """omega int_0^{pi/2} sin^a cos^{n-1} = omega G((a+1)/2) G(n/2) / (2 G((n+a+1)/2))."""
    return omega * gamma_fn((alpha + 1) / 2.0) * gamma_fn(n / 2.0) / (2.0 * gamma_fn((n + alpha + 1) / 2.0))


def surface_constant_quadrature(n, alpha, omega, order=40):
    phi, w = composite_rule(np.array([0.0, math.pi / 4, math.pi / 2]), order, alpha)
    if alpha != 0.0:
        w = w * (np.sin(phi) / phi) ** alpha
    return omega * stable_sum(w * np.cos(phi) ** (n - 1))


# ---------------------------------------------------------------------------
# Sharpness of K: u = eta psi(x, max(y, eps))


def _k_sweep_point(gs, eps, levels, order, grading):
    n, al = gs.params.n, gs.params.alpha
    c_h = gs.params.hardy_coeff

    def fields(r, y):
        yt = np.maximum(y, eps)
        U, Ur, Uy = gs.meridian(r, yt)
        er, der = cutoff(r)
        ey, dey = cutoff(y)
        u = er * ey * U
        ur = der * ey * U + er * ey * Ur
        uy = er * dey * U + er * ey * np.where(y > eps, Uy, 0.0)
        return u, ur, uy

    def numerator(r, y):
        u, ur, uy = fields(r, y)
        return ur * ur + uy * uy - c_h * u * u / (r * r + y * y)

    def trace(r):
        u, _, _ = fields(r, np.zeros_like(r))
        return u * u

    geo_up = [eps * 2.0 ** j for j in range(1, 64) if eps * 2.0 ** j < 1.0]
    below = [eps * 2.0 ** -j for j in range(grading, 0, -1)]
    y_breaks = [0.0] + below + [eps] + geo_up + [1.0, 2.0]
    r_breaks = [0.0] + [eps * 2.0 ** -j for j in range(grading, 0, -1)] + [eps] + geo_up + [1.0, 2.0]
    N = integrate_meridian(numerator, n, al, r_breaks, y_breaks, levels, order)
    # trace weight r^{n-1} r^{alpha-1}
    D = integrate_radial(trace, r_breaks, levels, order, power=n - 2.0 + al)
    return N, D


def sharpness_K_sweep(p, norm=None, eps_list=(0.2, 0.1, 0.05), levels=1, order=8, grading=12,
                      angular_order=ANGULAR_ORDER):
    """Q[u_eps] = (energy - Hardy) / trace for the truncated ground state.

    u_eps = eta psi(x, y) for y >= eps and eta psi(x, eps) below, with eta the
    product of quintic cutoffs in H0(x) and y between the cylinders of radius
    1 and 2.  Integration is split at y = eps, where u is only Lipschitz.
    """
    p = _params(p)
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])) or min(eps_list) <= 0:
        raise ValueError("eps_list must be positive and decreasing")
    lifted = _lifted(norm, p.n)
    gs = GroundState.build(p.n, p.alpha, p.b, lifted)
    omega = wulff_perimeter(lifted.base, angular_order)
    K = p.K

    def one(eps):
        N, D = _k_sweep_point(gs, eps, levels, order, grading)
        q = N.value / D.value
        err = abs(q) * (N.error_estimate / abs(N.value) + D.error_estimate / abs(D.value))
        return SweepRow(eps, q, K, err, {"numerator": omega * N.value, "denominator": omega * D.value})

    rows = ordered_map(one, eps_list)
    return SweepResult("sharpness_K", tuple(rows), {"params": p.as_tuple(), "family": lifted.base.family})


# ---------------------------------------------------------------------------
# Logarithmic variables


def chain_from(j, xj, k):
    """[X_j, X_{j+1}, ..., X_k] from X_j (X_0 = rho), each X_{i+1} = 1/(1 - ln X_i)."""
    out = [np.asarray(xj, dtype=float)]
    for _ in range(j, k):
        out.append(1.0 / (1.0 - np.log(out[-1])))
    return out


def weights_at(rho, k):
    """(X_1..X_k, P_1..P_k) at rho in (0, 1]; depth-0 gives empty lists."""
    if k == 0:
        return [], []
    X, P, _ = log_weights(k, rho)
    return list(X), list(P)


# ---------------------------------------------------------------------------
# Sharpness of 1/4


@dataclass(frozen=True)
class RemainderPoint:
    eps: tuple
    quotient: float
    picone_numerator: float
    denominator: float
    error: float


def _upsilon_sq(rho, eps, k):
    """rho^{2 e0} prod X_i^{2 e_i} and J = e0 + sum e_i P_i at rho."""
    X, P = weights_at(rho, k)
    v = rho ** (2.0 * eps[0])
    J = np.full_like(rho, eps[0])
    for i in range(k):
        v = v * X[i] ** (2.0 * eps[i + 1])
        J = J + eps[i + 1] * P[i]
    return v, J, (P[-1] if k else np.ones_like(rho))


def remainder_pieces(k, eps, R=0.25, levels=1, order=16, panels=40):
    """(N_f, den) for u = psi_k upsilon_eps eta(rho), rho = Phi0 / D, up to omega A.

    N_f = int rho w'^2 / P_k and den = int P_k w^2 / rho with w = upsilon eta,
    eta = 1 on [0, R] and 0 beyond 2R.  On [0, R] the variable is X_j for the
    first non-zero eps_j (X_0 = rho), with the Jacobi weight X_j^{2 eps_j - 1}.
    """
    eps = tuple(float(e) for e in eps)
    if len(eps) != k + 1 or min(eps) < 0 or max(eps) <= 0:
        raise ValueError("eps must have k+1 non-negative entries, not all zero")
    if not 0 < R <= 0.5:
        raise ValueError("cutoff radius must satisfy 2R <= 1")
    j = next(i for i, e in enumerate(eps) if e > 0)
    top = chain_from(0, np.array([R]), j)[-1][0]

    def inner(which):
        def F(xj):
            ch = chain_from(j, xj, k)
            # P_k / P_j = X_{j+1} ... X_k
            ratio = np.ones_like(xj)
            for x in ch[1:]:
                ratio = ratio * x
            w2 = np.ones_like(xj)
            for i in range(j + 1, k + 1):
                w2 = w2 * ch[i - j] ** (2.0 * eps[i])
            if which == "den":
                return ratio * w2
            # J / P_k = sum_i eps_i / (X_{i+1} ... X_k)
            jp = np.zeros_like(xj)
            for i in range(j, k + 1):
                tail = np.ones_like(xj)
                for x in ch[i - j + 1:]:
                    tail = tail * x
                jp = jp + eps[i] / tail
            return jp * jp * ratio * w2
        return F

    breaks = graded_breaks(0.0, top, panels)
    power = 2.0 * eps[j] - 1.0
    N_in = integrate_radial(inner("num"), breaks, levels, order, power)
    D_in = integrate_radial(inner("den"), breaks, levels, order, power)

    def outer(which):
        def F(rho):
            v, J, Pk = _upsilon_sq(rho, eps, k)
            eta, deta = cutoff(rho, R, TRANSITION_RATIO * R)
            if which == "den":
                return Pk * v * eta * eta / rho
            dw = J * eta / rho + deta
            return rho * v * dw * dw / Pk
        return F

    ob = np.linspace(R, TRANSITION_RATIO * R, 5)
    N_out = integrate_radial(outer("num"), ob, levels, order)
    D_out = integrate_radial(outer("den"), ob, levels, order)
    return N_in + N_out, D_in + D_out


def sharpness_remainder_sweep(p, norm, dom, k, eps_vec, R=0.25, levels=1, with_A=True,
                              angular_order=ANGULAR_ORDER):
    """Q_k[u_eps] = 1/4 + N_f / den for u = psi_k upsilon_eps eta.

    eps_vec is one (eps_0, ..., eps_k) tuple or a sequence of them.  The
    nested order of the limits is realised by setting the earlier entries to
    zero, which is their limit by monotone convergence.
    """
    p = _params(p)
    if dom.kind != DomainKind.WULFF_HALF_BALL:
        raise QuadratureError("the remainder sweep lives on a Wulff half-ball")
    single = np.ndim(eps_vec[0]) == 0
    vecs = [tuple(eps_vec)] if single else [tuple(e) for e in eps_vec]
    lifted = _lifted(norm, p.n)
    scale = 1.0
    if with_A:
        gs = GroundState.build(p.n, p.alpha, p.b, lifted)
        scale = wulff_perimeter(lifted.base, angular_order) * angular_constant(gs)

    def one(e):
        N, D = remainder_pieces(k, e, R, levels)
        q = 0.25 + N.value / D.value
        err = abs(N.value / D.value) * (N.error_estimate / max(abs(N.value), 1e-300)
                                        + D.error_estimate / abs(D.value))
        return SweepRow(e, q, 0.25, err, {"picone_numerator": scale * N.value,
                                          "denominator": scale * D.value})

    rows = ordered_map(one, vecs)
    return SweepResult("sharpness_remainder", tuple(rows), {"params": p.as_tuple(), "k": k})


def _polar_meridian(F, n, alpha, rho_breaks, power, levels=1, order=16, invert=False,
                    phi_power=None):
    """int int y^a r^{n-1} F(r, y) dr dy over rho in the given panels (all phi).

    The rule in rho carries the Jacobi weight rho^power at the first break
    (0); with ``invert`` the panels are in sigma = 1/rho and rho ranges over
    [1/sigma_max, inf).  The angular rule carries phi^phi_power (default
    alpha); energy densities, which blow up like y^-|a|, need -|a|.
    """
    if phi_power is None:
        phi_power = alpha
    phi_b = np.array([0.0, math.pi / 4, math.pi / 2])

    def rule(L):
        q = order + 4 * L
        phi, wphi = composite_rule(graded_breaks(0.0, math.pi / 2, 6) if phi_power < 0 else phi_b,
                                   q, phi_power)
        if phi_power != 0.0:
            wphi = wphi * (np.sin(phi) / phi) ** phi_power
        wphi = wphi * np.sin(phi) ** (alpha - phi_power) * np.cos(phi) ** (n - 1)
        s, ws = composite_rule(np.asarray(rho_breaks, dtype=float), q, power)
        if invert:
            rho = 1.0 / s
            # d rho = d sigma / sigma^2; divide out the sigma^power of the rule
            g_scale = rho ** (n + alpha) / s ** 2 / s ** power
        else:
            rho = s
            g_scale = rho ** (n + alpha) / s ** power
        RR = np.multiply.outer(rho, np.cos(phi))
        YY = np.multiply.outer(rho, np.sin(phi))
        v = np.asarray(F(RR.ravel(), YY.ravel()), dtype=float).reshape(RR.shape)
        if not np.all(np.isfinite(v)):
            raise QuadratureError("non-finite integrand sample")
        W = np.multiply.outer(ws * g_scale, wphi)
        return stable_sum(v * W), W.size

    lo_v, lo_n = rule(levels)
    hi_v, hi_n = rule(levels + 1)
    return QuadratureResult(hi_v, abs(hi_v - lo_v), lo_n + hi_n)


def remainder_quotient_direct(p, norm, k, eps, R=0.25, levels=1, panels=30):
    """Q_k from the raw terms (energy, trace, Hardy, remainders); needs eps_0 > 0.

    Independent of the Picone reduction: used to cross-check it.
    Returns (Q_k, QuadratureResult of numerator, of denominator).
    """
    p = _params(p)
    eps = tuple(float(e) for e in eps)
    if eps[0] <= 0:
        raise ValueError("the direct route needs eps_0 > 0 for finite terms")
    lifted = _lifted(norm, p.n)
    gs = GroundState.build(p.n, p.alpha, p.b, lifted)
    n, al = p.n, p.alpha
    K, c_h = p.K, p.hardy_coeff

    def fields(r, y):
        rho = np.hypot(r, y)
        U, Ur, Uy = gs.meridian(r, y)
        X, P = weights_at(rho, k)
        Pk = P[-1] if k else np.ones_like(rho)
        S = sum(P) if k else np.zeros_like(rho)
        v2, J, _ = _upsilon_sq(rho, eps, k)
        v = np.sqrt(v2)
        eta, deta = cutoff(rho, R, TRANSITION_RATIO * R)
        w = v * eta
        dw = v * (J * eta / rho + deta)           # d w / d rho
        sq = 1.0 / np.sqrt(Pk)
        psik = U * sq
        gr = sq * (Ur - 0.5 * U * S * r / rho ** 2)
        gy = sq * (Uy - 0.5 * U * S * y / rho ** 2)
        u = psik * w
        ur = gr * w + psik * dw * r / rho
        uy = gy * w + psik * dw * y / rho
        return rho, u, ur, uy, P

    def num(r, y):
        rho, u, ur, uy, P = fields(r, y)
        out = ur * ur + uy * uy - c_h * u * u / rho ** 2
        for i in range(k - 1):
            out = out - 0.25 * P[i] ** 2 * u * u / rho ** 2
        return out

    def den(r, y):
        rho, u, _, _, P = fields(r, y)
        return P[-1] ** 2 * u * u / rho ** 2

    breaks = np.concatenate([graded_breaks(0.0, R, panels), [1.5 * R, TRANSITION_RATIO * R]])
    power = 2.0 * eps[0] - 1.0
    Nb = _polar_meridian(num, n, al, breaks, power, levels, phi_power=-abs(al))
    Db = _polar_meridian(den, n, al, breaks, power, levels)

    def tr(r):
        _, u, _, _, _ = fields(r, np.zeros_like(r))
        return u * u * r ** (n - 2.0 + al) / r ** power

    T = integrate_radial(tr, breaks, levels, 16, power)
    num_total = QuadratureResult(Nb.value - K * T.value, Nb.error_estimate + K * T.error_estimate,
                                 Nb.node_count + T.node_count)
    return num_total.value / Db.value, num_total, Db


# ---------------------------------------------------------------------------
# Optimality of the logarithmic weight


def default_eps_m(epsilon, m):
    """epsilon < eps_m < 1 with eps_m -> epsilon and (eps_m - epsilon) ln m -> inf."""
    return epsilon + min(0.5 * (1.0 - epsilon), 1.0 / math.sqrt(math.log(m)))


def log_radius(k, m):
    """ln R_k(m) for R_1(m) = e^{1-m}, R_{j+1}(m) = R_j(e^{m-1})."""
    arg = float(m)
    for _ in range(k - 1):
        arg = math.exp(arg - 1.0)
    return 1.0 - arg


def weight_power_closed_forms(epsilon, eps_m, m, X_delta, S):
    """S times the bracketed closed forms of the N- and D-side integrals on W_delta."""
    N = (eps_m - 1.0) ** 2 / (4.0 * eps_m) * (X_delta ** eps_m - m ** -eps_m) + m ** -eps_m / 3.0
    D = (X_delta ** (eps_m - epsilon) - m ** (epsilon - eps_m)) / (eps_m - epsilon) + m ** (epsilon - eps_m) / (3.0 - epsilon)
    return S * N, S * D


def _chain_from_tau(k, tau_k):
    """Weights (X_1..X_k) from tau_k = 1/X_k - 1 = -ln X_{k-1}."""
    X = [None] * k
    X[k - 1] = 1.0 / (1.0 + tau_k)
    if k >= 2:
        X[k - 2] = np.exp(-tau_k)
        for i in range(k - 3, -1, -1):
            X[i] = np.exp(1.0 - 1.0 / X[i + 1])
    return X


def weight_power_integrals(k, epsilon, eps_m, m, delta, levels=1, order=16):
    """Quadrature of int_0^delta G(rho) d rho / rho for the N- and D-side densities.

    G_N = phi_m^2 / P_{k-1}, G_D = P_{k-1} X_k^{2-eps} upsilon_m^2, evaluated
    in the logarithmic variable tau_k = 1/X_k - 1 (d rho / rho = d tau_k / P_{k-1}).
    Returns QuadratureResults (N, D), including an analytic tail bound.
    """
    if k > 2:
        raise QuadratureError("the log-variable quadrature underflows for k > 2")
    tau_lo = 1.0 / chain_from(0, np.array([delta]), k)[-1][0] - 1.0
    kink = m - 1.0
    tau_max = 700.0 if k == 2 else 1e6 * m
    if not tau_lo < kink < tau_max:
        raise QuadratureError("m is outside the representable range for this depth")
    inner_breaks = np.linspace(tau_lo, kink, 9)
    outer = [kink]
    while outer[-1] < tau_max:
        outer.append(min(tau_max, kink + 2.0 * (outer[-1] - kink) + 1.0))
    breaks = np.concatenate([inner_breaks, outer[1:]])

    def dens(which):
        def F(tau):
            X = _chain_from_tau(k, tau)
            Xk = X[-1]
            Pk1 = np.prod(X[:-1], axis=0) if k > 1 else np.ones_like(tau)
            Pk = Pk1 * Xk
            out_region = Xk >= 1.0 / m
            ups2 = np.where(out_region, Xk ** (eps_m - 1.0), m ** (3.0 - eps_m) * Xk * Xk)
            if which == "N":
                phi = np.where(out_region, 0.5 * (eps_m - 1.0) * Pk * Xk ** (0.5 * (eps_m - 1.0)),
                               m ** (0.5 * (3.0 - eps_m)) * Pk * Xk)
                G = phi * phi / Pk1
            else:
                G = Pk1 * Xk ** (2.0 - epsilon) * ups2
            return G / Pk1
        return F

    res = []
    for which in ("N", "D"):
        F = dens(which)
        r = integrate_radial(F, breaks, levels, order)
        # tail beyond tau_max decays like tau^-4 (N) or tau^-(4-eps) (D)
        tail = float(F(np.array([tau_max]))[0]) * tau_max / (3.0 - epsilon)
        res.append(QuadratureResult(r.value + tail, r.error_estimate + tail, r.node_count))
    return res[0], res[1]


def weight_power_failure_sweep(p, norm, dom, k, epsilon, m_list, delta=0.5, eps_m=None,
                               levels=1, angular_order=ANGULAR_ORDER):
    """Ratio (int y^a f(u_m, psi_{k-1})) / (int y^a P_{k-1}^2 X_k^{2-eps} u_m^2 / Phi0^2).

    u_m = eta psi_{k-1} upsilon_m with upsilon_m = X_k^{(eps_m-1)/2} above
    R_k(m) and m^{(3-eps_m)/2} X_k below, eta = 1 on W_delta and 0 at Phi0 = D.
    Each row also carries the W_delta integrals with the model weight
    Phi0^{-(n+a+1)} next to their closed forms.
    """
    p = _params(p)
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if k < 1:
        raise ValueError("k >= 1")
    m_list = [int(m) for m in m_list]
    if any(b <= a for a, b in zip(m_list, m_list[1:])) or m_list[0] < 2:
        raise ValueError("m_list must be increasing integers >= 2")
    if dom.kind != DomainKind.WULFF_HALF_BALL:
        raise QuadratureError("the weight-power sweep lives on a Wulff half-ball")
    lifted = _lifted(norm, p.n)
    omega = wulff_perimeter(lifted.base, angular_order)
    S_closed = surface_constant(p.n, p.alpha, omega)
    S_quad = surface_constant_quadrature(p.n, p.alpha, omega)
    gs = GroundState.build(p.n, p.alpha, p.b, lifted)
    A = omega * angular_constant(gs)
    X_delta = float(chain_from(0, np.array([delta]), k)[-1][0])

    def one(m):
        lr = log_radius(k, m)
        if lr < -700.0:
            raise QuadratureError(f"R_{k}({m}) underflows; cap m for depth {k}")
        em = default_eps_m(epsilon, m) if eps_m is None else eps_m(epsilon, m)
        Nq, Dq = weight_power_integrals(k, epsilon, em, m, delta, levels)
        Nc, Dc = weight_power_closed_forms(epsilon, em, m, X_delta, S_closed)

        # transition layer delta < rho < 1, where upsilon = X_k^{(eps_m-1)/2}
        def tN(rho):
            X, P = weights_at(rho, k)
            Pk1 = P[k - 2] if k > 1 else np.ones_like(rho)
            ups = X[-1] ** (0.5 * (em - 1.0))
            phi = 0.5 * (em - 1.0) * P[-1] * ups
            eta, deta = cutoff(rho, delta, 1.0)
            dw = phi / rho * eta + ups * deta
            return rho * dw * dw / Pk1

        def tD(rho):
            X, P = weights_at(rho, k)
            Pk1 = P[k - 2] if k > 1 else np.ones_like(rho)
            eta, _ = cutoff(rho, delta, 1.0)
            return Pk1 * X[-1] ** (2.0 - epsilon) * X[-1] ** (em - 1.0) * eta * eta / rho

        tb = np.linspace(delta, 1.0, 5)
        TN = integrate_radial(tN, tb, levels, 16)
        TD = integrate_radial(tD, tb, levels, 16)
        N = A * (Nq.value + TN.value)
        D = A * (Dq.value + TD.value)
        ratio = N / D
        err = ratio * ((Nq.error_estimate + TN.error_estimate) / (Nq.value + TN.value)
                       + (Dq.error_estimate + TD.error_estimate) / (Dq.value + TD.value))
        return SweepRow(m, ratio, 0.0, err, {
            "eps_m": em, "log_R_k": lr, "N": N, "D": D,
            "N_model": S_quad * Nq.value, "N_closed": Nc,
            "D_model": S_quad * Dq.value, "D_closed": Dc,
        })

    rows = ordered_map(one, m_list)
    return SweepResult("weight_power", tuple(rows), {"params": p.as_tuple(), "k": k, "epsilon": epsilon})


# ---------------------------------------------------------------------------
# No L^p improvement


def half_ball_indicator(z, lifted):
    return (lifted.dual(z) < 1.0).astype(float)


def no_Lp_improvement_demo(p, norm=None, eps_list=(0.4, 0.2, 0.1), q=2.0, levels=1, panels=24,
                           angular_order=ANGULAR_ORDER):
    """deficit(u_eps) / (int V |u_eps|^q)^{2/q} for u_eps = psi Phi0^{+-eps/2}.

    V is the indicator of the unit Wulff half-ball.  The deficit is taken from
    the raw energy, trace and Hardy integrals.  Integrating by parts gives
    deficit = eps I - (eps^2/4) Hardy[u_eps] with I the surface integral
    int_{Phi0 = 1} y^a psi^2 / |grad Phi0| d sigma, and Hardy[u_eps] = 2 I / eps,
    so the deficit is exactly (eps/2) I.
    """
    p = _params(p)
    lifted = _lifted(norm, p.n)
    gs = GroundState.build(p.n, p.alpha, p.b, lifted)
    n, al = p.n, p.alpha
    K, c_h = p.K, p.hardy_coeff
    omega = wulff_perimeter(lifted.base, angular_order)
    surface = omega * angular_constant(gs)
    deg = p.degree

    def make(eps, outer):
        sgn = -1.0 if outer else 1.0

        def fields(r, y):
            rho = np.hypot(r, y)
            U, Ur, Uy = gs.meridian(r, y)
            w = rho ** (sgn * eps / 2.0)
            dw = sgn * eps / 2.0 * w / rho
            return U * w, Ur * w + U * dw * r / rho, Uy * w + U * dw * y / rho, rho

        def energy(r, y):
            _, ur, uy, _ = fields(r, y)
            return ur * ur + uy * uy

        def hardy(r, y):
            u, _, _, rho = fields(r, y)
            return u * u / rho ** 2

        def trace(r):
            u, _, _, _ = fields(r, np.zeros_like(r))
            return u * u * r ** (n - 2.0 + al)

        return energy, hardy, trace, fields

    rows = []
    for eps in eps_list:
        eps = float(eps)
        # both halves behave like rho^{eps-1} (inner) and sigma^{eps-1} (outer)
        pw = eps - 1.0
        br = graded_breaks(0.0, 1.0, panels)
        parts = {"energy": 0.0, "hardy": 0.0, "trace": 0.0}
        errs = dict(parts)
        for outer in (False, True):
            e_f, h_f, t_f, _ = make(eps, outer)
            E = _polar_meridian(e_f, n, al, br, pw, levels, invert=outer, phi_power=-abs(al))
            H = _polar_meridian(h_f, n, al, br, pw, levels, invert=outer)
            if outer:
                T = integrate_radial(lambda s: t_f(1.0 / s) / s ** 2 / s ** pw, br, levels, 16, pw)
            else:
                T = integrate_radial(lambda r: t_f(r) / r ** pw, br, levels, 16, pw)
            for key, res in (("energy", E), ("hardy", H), ("trace", T)):
                parts[key] += omega * res.value
                errs[key] += omega * res.error_estimate
        deficit = parts["energy"] - K * parts["trace"] - c_h * parts["hardy"]
        err = errs["energy"] + K * errs["trace"] + c_h * errs["hardy"]

        # V-norm over the unit half-ball, no y-weight: leading power n + q*deg + q*eps/2
        _, _, _, fields = make(eps, False)

        def vq(r, y):
            u, _, _, rho = fields(r, y)
            return np.abs(u) ** q * y ** (-al)

        Vres = _polar_meridian(vq, n, al, br, n + q * deg + q * eps / 2.0, levels)
        vnorm = (omega * Vres.value) ** (2.0 / q)
        rows.append(SweepRow(eps, deficit / vnorm, 0.0, err / vnorm, {
            "deficit": deficit, "deficit_error": err, "v_norm": vnorm,
            "predicted_deficit": 0.5 * eps * surface, "energy": parts["energy"],
            "hardy": parts["hardy"], "trace": parts["trace"],
            # energy - K trace - (c_h - eps^2/4) hardy = eps * surface
            "identity_residual": deficit + 0.25 * eps * eps * parts["hardy"] - eps * surface,
        }))
    slope = math.fsum(r.extras["deficit"] * r.control_parameter for r in rows) / \
        math.fsum(r.control_parameter ** 2 for r in rows)
    return SweepResult("no_Lp", tuple(rows), {"params": p.as_tuple(), "surface_integral": surface,
                                               "slope": slope})
