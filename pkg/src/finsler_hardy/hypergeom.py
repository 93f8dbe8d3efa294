"""Gamma, digamma and the Gauss hypergeometric function on the negative real axis.

Only real arguments are supported.  ``hyp2f1`` evaluates F(a, b; c; z) for
z <= 0 by

* the Gauss series when |z| <= 0.5,
* the Pfaff transformation F = (1-z)^{-a} F(a, c-b; c; z/(z-1)) when
  -2 <= z < -0.5,
* the connection formulas around z = infinity when z < -2.  The generic
  formula is Abramowitz & Stegun 15.3.7; the logarithmic cases a = b and
  b - a = m use 15.3.13 and 15.3.14, and the case with c - a a positive
  integer uses Erdelyi et al., Higher Transcendental Functions I, 2.1.4 (19).

Parameter sets where a, b, c - a or c - b is a non-positive integer reduce
to polynomials and are summed directly.

References
----------
Abramowitz, M. and Stegun, I. A., Handbook of Mathematical Functions, ch. 15.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

EULER_GAMMA = 0.57721566490153286061
INT_TOL = 1e-9
AMBIGUOUS_TOL = 1e-6
SERIES_RTOL = 1e-16
LOG_SERIES_RTOL = 1e-15
MAX_TERMS = 10_000
PFAFF_LIMIT = -2.0


class HypergeomError(ArithmeticError):
    """Base class for failures in this module."""


class GammaPoleError(HypergeomError):
    """Raised when a Gamma or digamma factor sits on a pole."""

    def __init__(self, where, value):
        super().__init__(f"pole of Gamma at {where} = {value!r}")
        self.where = where
        self.value = value


class AmbiguousCaseError(HypergeomError):
    """A parameter is too close to an integer to classify safely."""


class SeriesDivergenceError(HypergeomError):
    """A series did not converge within ``MAX_TERMS`` terms."""


# ---------------------------------------------------------------------------
# Gamma and digamma

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _is_nonpositive_int(s):
    return s <= 0.0 and s == math.floor(s)


def _sinpi(s):
    # sin(pi s) with the argument reduced first, so it is exact at integers.
    n = round(s)
    r = math.sin(math.pi * (s - n))
    return -r if n % 2 else r


def _tanpi(s):
    return math.tan(math.pi * (s - round(s)))


def gamma_fn(s):
    """Gamma function by the Lanczos approximation (g=7, 9 terms).

    Uses the reflection formula Gamma(s)Gamma(1-s) = pi/sin(pi s) for s < 1/2.
    Accurate to about 14 significant digits for moderate arguments.

    Raises
    ------
    GammaPoleError
        If s is a non-positive integer.
    """
    s = float(s)
    if _is_nonpositive_int(s):
        raise GammaPoleError("s", s)
    if s < 0.5:
        return math.pi / (_sinpi(s) * gamma_fn(1.0 - s))
    s -= 1.0
    x = _LANCZOS[0]
    for i in range(1, 9):
        x += _LANCZOS[i] / (s + i)
    t = s + _LANCZOS_G + 0.5
    if s > 140.0:
        return math.exp((s + 0.5) * math.log(t) - t) * _SQRT_2PI * x
    return _SQRT_2PI * t ** (s + 0.5) * math.exp(-t) * x


def rgamma(s):
    """Reciprocal Gamma function, equal to zero at the poles."""
    s = float(s)
    if _is_nonpositive_int(s):
        return 0.0
    return 1.0 / gamma_fn(s)


def digamma_fn(s):
    """Digamma function Psi = Gamma'/Gamma.

    Shifts the argument above 10 with Psi(s+1) = Psi(s) + 1/s and sums the
    asymptotic series there; negative arguments use the reflection
    Psi(1-s) - Psi(s) = pi cot(pi s).
    """
    s = float(s)
    if _is_nonpositive_int(s):
        raise GammaPoleError("s", s)
    if s < 0.5:
        return digamma_fn(1.0 - s) - math.pi / _tanpi(s)
    acc = 0.0
    while s < 10.0:
        acc -= 1.0 / s
        s += 1.0
    f = 1.0 / (s * s)
    tail = f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f / 132))))
    return acc + math.log(s) - 0.5 / s - tail


def pochhammer(a, k):
    """Rising factorial (a)_k for integer k >= 0."""
    out = 1.0
    for i in range(k):
        out *= a + i
    return out


# ---------------------------------------------------------------------------
# Case classification


class CaseTag(str, Enum):
    SeriesDisk = "SeriesDisk"
    CaseI = "CaseI"
    CaseII = "CaseII"
    CaseIII_generic = "CaseIII_generic"
    CaseIII_integer_cma = "CaseIII_integer_cma"
    CaseIV_polynomial = "CaseIV_polynomial"
    CaseIV_reflected = "CaseIV_reflected"


@dataclass(frozen=True)
class CaseInfo:
    """Result of :func:`classify_case`.

    ``a, b, c`` are the parameters in the order the formula expects (a and b
    may be swapped relative to the input).  ``m`` and ``l`` carry the
    integer offsets where the case has them.
    """

    tag: CaseTag
    a: float
    b: float
    c: float
    m: int | None = None
    l: int | None = None


def _nearest_int(x, what):
    """Return the nearest integer if x is within INT_TOL of it, else None.

    Values that fall between INT_TOL and AMBIGUOUS_TOL of an integer raise
    AmbiguousCaseError.
    """
    n = round(x)
    d = abs(x - n)
    if d <= INT_TOL:
        return int(n)
    if d < AMBIGUOUS_TOL:
        raise AmbiguousCaseError(
            f"{what} = {x!r} lies {d:.3g} from the integer {int(n)}; "
            f"cannot decide between the degenerate and generic formulas"
        )
    return None


def _nonpositive_int(x, what):
    if x > 0.5:
        return None
    n = _nearest_int(x, what)
    if n is not None and n <= 0:
        return n
    return None


def classify_case(a, b, c, z=None):
    """Select the evaluation formula for F(a, b; c; z).

    Polynomial reductions are reported regardless of z.  Otherwise, when z is
    given and z >= -2, the tag is ``SeriesDisk`` (Gauss series, directly or
    after the Pfaff map).  Without z the tag describes the continuation
    formula that applies for large |z|.
    """
    a, b, c = float(a), float(b), float(c)
    if _nonpositive_int(c, "c") is not None:
        raise GammaPoleError("c", c)

    for x, y in ((a, b), (b, a)):
        m = _nonpositive_int(x, "a or b")
        if m is not None:
            return CaseInfo(CaseTag.CaseIV_polynomial, x, y, c, m=-m)
    for x, y in ((a, b), (b, a)):
        # c - y = -l  ->  F = (1-z)^{-x-l} F(c-x, -l; c; z)
        l = _nonpositive_int(c - y, "c - a or c - b")
        if l is not None:
            return CaseInfo(CaseTag.CaseIV_reflected, x, y, c, l=-l)

    if z is not None and z >= PFAFF_LIMIT:
        return CaseInfo(CaseTag.SeriesDisk, a, b, c)

    m = _nearest_int(b - a, "b - a")
    if m is None:
        return CaseInfo(CaseTag.CaseI, a, b, c)
    if m < 0:
        a, b, m = b, a, -m
    l = c - a
    l_int = _nearest_int(l, "c - a") if l > 0.5 else None
    if l_int is not None and l_int > m:
        return CaseInfo(CaseTag.CaseIII_integer_cma, a, b, c, m=m, l=l_int)
    if m == 0:
        return CaseInfo(CaseTag.CaseII, a, b, c, m=0)
    return CaseInfo(CaseTag.CaseIII_generic, a, b, c, m=m)


# ---------------------------------------------------------------------------
# Series kernels (vectorised over z)


def _gauss_series(a, b, c, w):
    w = np.asarray(w, dtype=float)
    term = np.ones_like(w)
    total = np.ones_like(w)
    for k in range(MAX_TERMS):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * w
        total = total + term
        if not np.any(term):
            return total
        r = np.abs((a + k + 1) * (b + k + 1) / ((c + k + 1) * (k + 2.0)) * w)
        if np.all(r < 1.0):
            tail = np.abs(term) * r / (1.0 - r)
            if np.all(tail <= SERIES_RTOL * np.abs(total)):
                return total
    raise SeriesDivergenceError(f"Gauss series for ({a}, {b}; {c}) did not converge")


def _near_zero(a, b, c, z):
    """F on -2 <= z <= 0: the series, or the Pfaff map for z < -0.5."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z >= -0.5
    if np.any(small):
        out[small] = _gauss_series(a, b, c, z[small])
    if np.any(~small):
        zz = z[~small]
        out[~small] = (1.0 - zz) ** (-a) * _gauss_series(a, c - b, c, zz / (zz - 1.0))
    return out


def _polynomial(m, b, c, z):
    # F(-m, b; c; z) = sum_{k<=m} (-m)_k (b)_k / (c)_k z^k / k!
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(m):
        term = term * ((-m + k) * (b + k) / ((c + k) * (k + 1.0))) * z
        total = total + term
    return total


def _case_one(a, b, c, z):
    w = 1.0 / z
    g1 = gamma_fn(c) * gamma_fn(b - a) * rgamma(b) * rgamma(c - a)
    g2 = gamma_fn(c) * gamma_fn(a - b) * rgamma(a) * rgamma(c - b)
    out = np.zeros_like(z)
    if g1 != 0.0:
        out += g1 * (-z) ** (-a) * _near_zero(a, a - c + 1.0, a - b + 1.0, w)
    if g2 != 0.0:
        out += g2 * (-z) ** (-b) * _near_zero(b, b - c + 1.0, b - a + 1.0, w)
    return out


def _log_series(coef0, ratio, psi0, dpsi, w, lnz):
    """Sum_k coef_k w^k [ln(-z) + psi_k] with coef/psi updated incrementally.

    ``ratio(k)`` gives coef_{k+1}/coef_k and ``dpsi(k)`` gives
    psi_{k+1} - psi_k.  The loop stops once the geometric tail bound falls
    below LOG_SERIES_RTOL times the partial sum.
    """
    coef = coef0
    psi = psi0
    wk = np.ones_like(w)
    total = coef * (lnz + psi)
    for k in range(MAX_TERMS):
        r = ratio(k)
        coef = coef * r
        psi = psi + dpsi(k)
        wk = wk * w
        term = coef * wk * (lnz + psi)
        total = total + term
        if coef == 0.0:
            return total
        rb = abs(ratio(k + 1)) * np.abs(w)
        if np.all(rb < 1.0):
            # the log factor grows by at most a factor (1 + 1/k) per step
            tail = np.abs(term) * rb / (1.0 - rb) * (1.0 + 2.0 / (k + 1))
            if np.all(tail <= LOG_SERIES_RTOL * np.abs(total)):
                return total
    raise SeriesDivergenceError("logarithmic continuation series did not converge")


def _case_two(a, c, z):
    w = 1.0 / z
    lnz = np.log(-z)
    e = 1.0 - c + a
    d = c - a
    psi0 = 2.0 * digamma_fn(1.0) - digamma_fn(a) - digamma_fn(d)
    s = _log_series(
        1.0,
        lambda k: (a + k) * (e + k) / ((k + 1.0) ** 2),
        psi0,
        lambda k: 2.0 / (k + 1.0) - 1.0 / (a + k) + 1.0 / (d - k - 1.0),
        w,
        lnz,
    )
    return gamma_fn(c) * rgamma(a) * rgamma(d) * (-z) ** (-a) * s


def _case_three_generic(a, m, c, z):
    w = 1.0 / z
    lnz = np.log(-z)
    e = 1.0 - c + a
    d = c - a
    coef0 = pochhammer(a, m) * pochhammer(e, m) / math.factorial(m)
    psi0 = digamma_fn(1.0 + m) + digamma_fn(1.0) - digamma_fn(a + m) - digamma_fn(d - m)
    s1 = _log_series(
        coef0,
        lambda k: (a + m + k) * (e + m + k) / ((k + m + 1.0) * (k + 1.0)),
        psi0,
        lambda k: 1.0 / (1.0 + m + k) + 1.0 / (1.0 + k) - 1.0 / (a + m + k) + 1.0 / (d - m - k - 1.0),
        w,
        lnz,
    )
    out = gamma_fn(c) * rgamma(a + m) * rgamma(d) * (-z) ** (-a - m) * s1
    s2 = np.zeros_like(z)
    wk = np.ones_like(z)
    for k in range(m):
        s2 = s2 + gamma_fn(m - k) * pochhammer(a, k) / math.factorial(k) * rgamma(d - k) * wk
        wk = wk * w
    return out + (-z) ** (-a) * gamma_fn(c) * rgamma(a + m) * s2


def _case_three_integer(a, m, l, z):
    """F(a, a+m; a+l; z) for integers l > m >= 0 and z < -1."""
    w = 1.0 / z
    lnz = np.log(-z)

    # t1 = (-1)^l (-z)^{-m} sum_{k>=l-m} (a)_{k+m} (k+m-l)! / ((k+m)! k!) z^{-k}
    k0 = l - m
    coef = pochhammer(a, l) / (math.factorial(l) * math.factorial(k0))
    wk = w ** k0
    t1 = coef * wk
    k = k0
    for _ in range(MAX_TERMS):
        r = (a + k + m) * (k + m - l + 1.0) / ((k + m + 1.0) * (k + 1.0))
        coef *= r
        wk = wk * w
        term = coef * wk
        t1 = t1 + term
        k += 1
        if coef == 0.0:
            break
        rb = abs((a + k + m) * (k + m - l + 1.0) / ((k + m + 1.0) * (k + 1.0))) * np.abs(w)
        if np.all(rb < 1.0) and np.all(np.abs(term) * rb / (1.0 - rb) <= LOG_SERIES_RTOL * np.abs(t1)):
            break
    else:
        raise SeriesDivergenceError("integer-case continuation series did not converge")
    t1 = (-1.0) ** l * (-z) ** (-m) * t1

    t2 = np.zeros_like(z)
    wk = np.ones_like(z)
    for k in range(m):
        t2 = t2 + (math.factorial(m - k - 1) * pochhammer(a, k)
                   / (math.factorial(l - k - 1) * math.factorial(k))) * wk
        wk = wk * w

    t3 = np.zeros_like(z)
    wk = np.ones_like(z)
    for k in range(l - m):
        coef = pochhammer(a, k + m) * pochhammer(1.0 - l, k + m) / (math.factorial(k + m) * math.factorial(k))
        psi = (digamma_fn(1.0 + m + k) + digamma_fn(1.0 + k)
               - digamma_fn(a + m + k) - digamma_fn(float(l - m - k)))
        t3 = t3 + coef * wk * (lnz + psi)
        wk = wk * w
    t3 = (-z) ** (-m) / math.factorial(l - 1) * t3

    return gamma_fn(a + l) * rgamma(a + m) * (-z) ** (-a) * (t1 + t2 + t3)


# ---------------------------------------------------------------------------
# Public evaluators


def hyp2f1(a, b, c, z, method="auto"):
    """Gauss hypergeometric function F(a, b; c; z) for real z <= 0.

    ``z`` may be a scalar or an array; the return type follows it.
    ``method="continuation"`` forces the connection formula at every z < 0
    (useful as an independent route on -2 <= z < -0.5); the default picks
    the region automatically.

    Raises
    ------
    ValueError
        If any z > 0.
    GammaPoleError
        If c is a non-positive integer.
    AmbiguousCaseError
        If a degeneracy test falls inside the ambiguity band.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zz > 0.0) or np.any(np.isnan(zz)):
        raise ValueError("hyp2f1 is implemented for real z <= 0 only")
    if method not in ("auto", "continuation"):
        raise ValueError(f"unknown method {method!r}")
    info = classify_case(a, b, c)
    out = _dispatch(info, zz, force=method == "continuation")
    return float(out[0]) if scalar else out


def _dispatch(info, z, force=False):
    a, b, c = info.a, info.b, info.c
    if info.tag is CaseTag.CaseIV_polynomial:
        return _polynomial(info.m, b, c, z)
    if info.tag is CaseTag.CaseIV_reflected:
        l = info.l
        return (1.0 - z) ** (-a - l) * _polynomial(l, c - a, c, z)

    out = np.empty_like(z)
    near = (z == 0.0) if force else (z >= PFAFF_LIMIT)
    if np.any(near):
        out[near] = _near_zero(a, b, c, z[near])
    if np.any(~near):
        zf = z[~near]
        if info.tag is CaseTag.CaseI:
            out[~near] = _case_one(a, b, c, zf)
        elif info.tag is CaseTag.CaseII:
            out[~near] = _case_two(a, c, zf)
        elif info.tag is CaseTag.CaseIII_generic:
            out[~near] = _case_three_generic(a, info.m, c, zf)
        else:
            out[~near] = _case_three_integer(a, info.m, info.l, zf)
    return out


def hyp2f1_derivative(a, b, c, z):
    """dF/dz = (ab/c) F(a+1, b+1; c+1; z)."""
    if a == 0.0 or b == 0.0:
        return 0.0 if np.ndim(z) == 0 else np.zeros(np.shape(z))
    return (a * b / c) * hyp2f1(a + 1.0, b + 1.0, c + 1.0, z)


def region_of(z):
    """Name of the evaluation region used for the argument z."""
    if z >= -0.5:
        return "series"
    if z >= PFAFF_LIMIT:
        return "pfaff"
    return "continuation"


def golden_table():
    """Frozen reference values [(a, b, c, z, F)] shipped with the package (mpmath, 40 digits)."""
    import csv
    from importlib import resources

    text = resources.files(__package__).joinpath("data/hyp2f1_golden.csv").read_text()
    rows = csv.DictReader(text.splitlines())
    return [tuple(float(r[k]) for k in ("a", "b", "c", "z", "value")) for r in rows]
