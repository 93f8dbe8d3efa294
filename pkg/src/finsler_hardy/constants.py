"""Sharp constants and the iterated logarithmic weights.

Constants
---------
``const_H(n, alpha)``      trace constant of the weighted Kato inequality
``const_C(n, b)``          trace constant of the unweighted interpolation
``const_K(n, alpha, b)``   trace constant of the weighted interpolation
``const_K_theta(n, b, t)`` trace constant on the cone {y > tan(t) H0(x)}

K interpolates: K(n, alpha, 2 - alpha) = H(n, alpha), K(n, 0, b) = C(n, b),
and K -> 0 as b -> n + 1.

Weights
-------
X_1(rho) = 1 / (1 - ln rho), X_j = X_1(X_{j-1}), P_k = X_1 ... X_k and
S_k = P_1 + ... + P_k, for 0 < rho <= 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hypergeom import gamma_fn, hyp2f1, rgamma

CONSISTENCY_TOL = 1e-8


class ParameterError(ValueError):
    pass


def _check_alpha(alpha):
    if not -1.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (-1, 1), got {alpha}")


def _check_b(n, b, lower):
    if not (lower - 1e-12 <= b < n + 1):
        raise ParameterError(f"b must satisfy {lower:g} <= b < {n + 1}, got {b}")


def const_H(n, alpha):
    """(1-a) G((n+1-a)/4)^2 G((a+1)/2) / (G((3-a)/2) G((n+a-1)/4)^2)."""
    _check_alpha(alpha)
    if n + alpha <= 1:
        raise ParameterError("need n + alpha > 1")
    g = gamma_fn((n + 1 - alpha) / 4.0)
    return ((1.0 - alpha) * g * g * gamma_fn((alpha + 1) / 2.0)
            * rgamma((3 - alpha) / 2.0) * rgamma((n + alpha - 1) / 4.0) ** 2)


def const_C(n, b):
    """2 G((n-b+3)/4) G((n+b-1)/4) / (G((n+1-b)/4) G((n+b-3)/4))."""
    _check_b(n, b, 2.0)
    return (2.0 * gamma_fn((n - b + 3) / 4.0) * gamma_fn((n + b - 1) / 4.0)
            * rgamma((n + 1 - b) / 4.0) * rgamma((n + b - 3) / 4.0))


def const_K(n, alpha, b):
    _check_alpha(alpha)
    _check_b(n, b, 2.0 - alpha)
    num = (gamma_fn((n - 2 * alpha - b + 3) / 4.0) * gamma_fn((n + b - 1) / 4.0)
           * gamma_fn((alpha + 1) / 2.0))
    return ((1.0 - alpha) * num * rgamma((3 - alpha) / 2.0)
            * rgamma((n + 1 - b) / 4.0) * rgamma((n + 2 * alpha + b - 3) / 4.0))


@dataclass(frozen=True)
class KThetaResult:
    value: float
    hypergeometric_form: float
    discrepancy: float

    @property
    def consistent(self):
        return self.discrepancy <= CONSISTENCY_TOL * max(1.0, abs(self.value))


class InconsistentFormsError(ArithmeticError):
    pass


def k_theta_hypergeometric(n, b, theta):
    """Cone constant written with F(., .; 3/2) and F(., .; 5/2) terms.

    beta tan(t) + [2 a1 b1 tan(t) F(a1+1, b1+1; 3/2; w) + C/2 F(a1+1/2, b1+1/2; 3/2; w)
                   - 2C/3 (a1+1/2)(b1+1/2) tan^2(t) F(a1+3/2, b1+3/2; 5/2; w)] * Ct,
    Ct = 2 cos(t)^-2 / [F(a1, b1; 1/2; w) - C tan(t) F(a1+1/2, b1+1/2; 3/2; w)],
    with w = -tan^2(t) and C = C(n, b).
    """
    a1 = (5.0 - n - b) / 4.0
    b1 = (n + 1.0 - b) / 4.0
    beta = (b - n - 1.0) / 2.0
    C = const_C(n, b)
    t = math.tan(theta)
    w = -t * t
    f_half = hyp2f1(a1 + 0.5, b1 + 0.5, 1.5, w)
    ct = 2.0 / math.cos(theta) ** 2 / (hyp2f1(a1, b1, 0.5, w) - C * t * f_half)
    bracket = (2.0 * a1 * b1 * t * hyp2f1(a1 + 1.0, b1 + 1.0, 1.5, w)
               + 0.5 * C * f_half
               - 2.0 * C / 3.0 * (a1 + 0.5) * (b1 + 0.5) * t * t * hyp2f1(a1 + 1.5, b1 + 1.5, 2.5, w))
    return beta * t + bracket * ct


def k_theta_ground_state(n, b, theta):
    """beta tan(t) - B'(tan t) / (B(tan t) cos^2 t), B the alpha = 0 profile."""
    from .ground_state import GroundState

    gs = GroundState.build(n, 0.0, b)
    t = math.tan(theta)
    return gs.params.beta * t - float(gs.B_prime(t)) / (float(gs.B(t)) * math.cos(theta) ** 2)


def const_K_theta(n, b, theta, strict=True):
    """Both printed forms of the cone constant; the ground-state form is primary.

    With ``strict`` a disagreement beyond 1e-8 raises InconsistentFormsError.
    """
    _check_b(n, b, 2.0)
    if not 0.0 < theta < math.pi / 2:
        raise ParameterError("theta must lie in (0, pi/2)")
    v = k_theta_ground_state(n, b, theta)
    h = k_theta_hypergeometric(n, b, theta)
    res = KThetaResult(v, h, abs(v - h))
    if strict and not res.consistent:
        raise InconsistentFormsError(f"cone constant forms disagree: {v!r} vs {h!r}")
    return res


# ---------------------------------------------------------------------------
# Logarithmic weights


def log_weights(k, rho):
    """Return (X, P, S) with X, P of shape (k, *rho.shape)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0) or np.any(rho > 1.0):
        raise ParameterError("weights are defined for 0 < rho <= 1")
    X = np.empty((k,) + rho.shape)
    P = np.empty_like(X)
    x = rho
    p = np.ones_like(rho)
    for i in range(k):
        x = 1.0 / (1.0 - np.log(x))
        p = p * x
        X[i] = x
        P[i] = p
    return X, P, P.sum(axis=0)


@dataclass(frozen=True)
class LogWeightStack:
    """Depth-k weights of rho = Phi0 / D."""

    k: int
    D: float = 1.0

    def __call__(self, rho):
        return log_weights(self.k, rho)

    def of_distance(self, phi0):
        return log_weights(self.k, np.asarray(phi0, dtype=float) / self.D)


def weights_eval(stack, rho):
    return stack(rho)


def weights_derivative_check(stack, rho, h=1e-6):
    """Max deviation of finite-difference derivatives from rho X_i' = P_i X_i and rho P_k' = P_k S_k.

    Uses central differences, or a second-order one-sided stencil when rho + h > 1.
    """
    X, P, S = stack(rho)
    if rho + h <= 1.0:
        Xp, _, _ = stack(rho + h)
        Xm, _, _ = stack(rho - h)
        dX = (Xp - Xm) / (2 * h)
        Pp = np.prod(Xp, axis=0)
        Pm = np.prod(Xm, axis=0)
        dP = (Pp - Pm) / (2 * h)
    else:
        X1, _, _ = stack(rho - h)
        X2, _, _ = stack(rho - 2 * h)
        dX = (3 * X - 4 * X1 + X2) / (2 * h)
        dP = (3 * np.prod(X, 0) - 4 * np.prod(X1, 0) + np.prod(X2, 0)) / (2 * h)
    e1 = np.max(np.abs(dX - P * X / rho))
    e2 = abs(float(dP) - float(P[-1] * S / rho))
    return float(max(e1, e2))
