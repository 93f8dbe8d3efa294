import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finsler_hardy.constants import const_K
from finsler_hardy.finsler_core import LiftedNorm, NormSpec
from finsler_hardy.ground_state import (
    GroundState,
    GroundStateError,
    ProblemParams,
    bc_residual,
    bc_residual_extrapolated,
    leading_coefficient_closed,
    make_hyper_params,
    ode_oracle,
    pde_residual,
    pde_residual_stencil,
    profile_ode_residual,
    slope_limit,
    substitution_residual,
)
from finsler_hardy.hypergeom import CaseTag

GRID = [(n, a, b) for n in (2, 3, 4, 5) for a in (-0.5, 0.0, 0.5)
        for b in (2 - a, 0.5 * (2 - a + n + 0.9), n + 0.9)]


def kato3():
    return GroundState.build(3, 0.0, 2.0)


def test_hyper_params_examples():
    h = make_hyper_params(ProblemParams(3, 0.0, 2.0))
    assert (h.a1, h.b1, h.c1, h.a2, h.b2, h.c2) == (0.0, 0.5, 0.5, 0.5, 1.0, 1.5)
    assert h.C2 == pytest.approx(-2 / math.pi, rel=1e-13)
    assert h.case1.tag == CaseTag.CaseIV_polynomial
    h = make_hyper_params(ProblemParams(2, 0.0, 2.0))
    assert (h.a1, h.b1, h.c1, h.a2, h.b2, h.c2) == (0.25, 0.25, 0.5, 0.75, 0.75, 1.5)
    h = make_hyper_params(ProblemParams(3, 0.5, 2.5))
    assert (h.c1, h.c2, h.b1) == (0.75, 1.25, 0.375)


def test_params_validation():
    with pytest.raises(GroundStateError):
        ProblemParams(3, 0.5, 1.0)
    with pytest.raises(GroundStateError):
        ProblemParams(3, 0.0, 4.0)
    with pytest.raises(GroundStateError):
        ProblemParams(3, 1.0, 2.0)
    assert ProblemParams(3, 0.5, 1.5).hardy_coeff == 0.0


def test_explicit_kato_profile():
    gs = kato3()
    t = np.array([1e-3, 0.1, 1.0, 10.0, 1e3])
    assert np.allclose(gs.B(t), 1 - 2 / math.pi * np.arctan(t), rtol=1e-13)
    assert np.allclose(gs.B_prime(t), -2 / math.pi / (1 + t * t), rtol=1e-12)
    assert float(gs.B(1.0)) == pytest.approx(0.5, rel=1e-14)
    assert float(gs.B(10.0)) == pytest.approx(0.0634510, abs=1e-7)
    assert float(gs.B_prime(1.0)) == pytest.approx(-1 / math.pi, rel=1e-13)


@pytest.mark.parametrize("p", GRID[::3])
def test_B_at_zero_and_monotone(p):
    gs = GroundState.build(*p)
    assert float(gs.B(0.0)) == 1.0
    t = np.logspace(-3, 3, 61)
    assert np.all(gs.B(t) > 0)
    assert np.all(gs.B_prime(t) < 0)


@pytest.mark.parametrize("p", GRID)
def test_profile_against_ode_oracle(p):
    gs = GroundState.build(*p)
    t = np.logspace(-2, 2, 41)
    ref = ode_oracle(gs.params, t)
    assert np.max(np.abs(gs.B(t) - ref.B) / ref.B) < 1e-6
    assert gs.L == pytest.approx(ref.L, rel=1e-6)


def test_ode_oracle_kato_and_residual():
    p = ProblemParams(3, 0.0, 2.0)
    t = np.logspace(-2, 2, 21)
    ref = ode_oracle(p, t)
    assert np.max(np.abs(ref.B - (1 - 2 / math.pi * np.arctan(t))) / ref.B) < 1e-8
    p = ProblemParams(4, 0.3, 2.4)
    ref = ode_oracle(p, t)
    res = profile_ode_residual(p, t[1:-1], ref.B[1:-1], ref.B_prime[1:-1], ref.second_derivative(t[1:-1]))
    assert np.max(res) < 1e-7


def test_ode_oracle_rejects_bad_grid():
    with pytest.raises(GroundStateError):
        ode_oracle(ProblemParams(3, 0, 2), np.array([1.0, 0.5]))


@pytest.mark.parametrize("p", [(3, 0.0, 2.0), (4, 0.3, 2.4), (2, -0.5, 2.75)])
def test_substitution_ode(p):
    gs = GroundState.build(*p)
    t = np.logspace(-1.5, 1.5, 13)
    ref = ode_oracle(gs.params, t)
    res = substitution_residual(gs.params, t, ref.B, ref.B_prime, ref.second_derivative(t))
    # the oracle's second derivative loses digits in the tail
    assert np.max(res) < 1e-5


@pytest.mark.parametrize("p", GRID[::2])
def test_far_coefficient_two_routes(p):
    gs = GroundState.build(*p)
    closed = leading_coefficient_closed(gs.params, gs.hyper)
    assert gs.L == pytest.approx(closed, rel=1e-10)


@pytest.mark.parametrize("p", GRID)
def test_slope_limit_matches_K(p):
    lim, _ = slope_limit(GroundState.build(*p))
    assert lim == pytest.approx(const_K(*p), abs=1e-6)


@pytest.mark.parametrize("p", [(3, 0.0, 2.0), (2, 0.5, 2.0), (4, -0.5, 3.0)])
def test_asymptotic_bands(p):
    gs = GroundState.build(*p)
    be = gs.params.beta
    t = np.logspace(-3, 3, 61)
    band = gs.B(t) / (1 + t * t) ** (be / 2)
    assert band.min() > 0 and band.max() < 10
    big = np.array([1e2, 1e3])
    tail = np.abs(big * gs.B_prime(big) - be * gs.B(big)) * big ** (2 - be)
    assert np.all(tail < 10)


def test_psi_explicit_value():
    gs = kato3()
    z = np.array([1.0, 0.0, 0.0, 1.0])
    assert float(gs.psi(z)) == pytest.approx(0.5, rel=1e-14)


def test_psi_on_axis_uses_far_coefficient():
    gs = GroundState.build(2, 0.5, 2.0)
    p = gs.params
    val = float(gs.psi(np.array([0.0, 0.0, 2.0])))
    assert val == pytest.approx(2.0 ** p.gamma_exp * 2.0 ** p.beta * gs.L, rel=1e-12)
    near = float(gs.psi(np.array([1e-7, 0.0, 2.0])))
    assert near == pytest.approx(val, rel=1e-6)


def test_psi_rejects_lower_half_space():
    with pytest.raises(GroundStateError):
        kato3().psi(np.array([1.0, 0.0, 0.0, -0.1]))


@pytest.mark.parametrize("spec", [NormSpec.euclidean(2), NormSpec.lp(4, 2), NormSpec.ellipsoid([[2, 0.6], [0.6, 1]])])
def test_euler_identity_and_fd_gradient(spec):
    gs = GroundState.build(2, 0.5, 2.2, LiftedNorm(spec))
    rng = np.random.default_rng(1)
    deg = gs.params.degree
    for _ in range(25):
        z = np.append(rng.uniform(-2, 2, 2), rng.uniform(0.1, 2))
        g = gs.psi_gradient(z)
        assert float(g @ z) == pytest.approx(deg * float(gs.psi(z)), rel=1e-8)
        h = 1e-6 * float(gs.norm.dual(z))
        fd = [(float(gs.psi(z + h * e)) - float(gs.psi(z - h * e))) / (2 * h) for e in np.eye(3)]
        assert np.allclose(g, fd, rtol=1e-5, atol=1e-7 * np.abs(g).max())


@given(lam=st.floats(0.05, 20.0), y=st.floats(0.05, 3.0), x=st.floats(-3.0, 3.0))
def test_psi_homogeneity(lam, y, x):
    gs = GroundState.build(1, 0.5, 1.75)
    z = np.array([x, y])
    assert float(gs.psi(lam * z)) == pytest.approx(lam ** gs.params.degree * float(gs.psi(z)), rel=1e-10)


def test_psi_k_factors():
    gs = kato3()
    z = np.array([math.exp(-1), 0.0, 0.0, 0.0])
    base = float(gs.psi(z))
    assert float(gs.psi_k(0, 1.0, z)) == base
    assert float(gs.psi_k(1, 1.0, z)) == pytest.approx(math.sqrt(2) * base, rel=1e-13)
    assert float(gs.psi_k(2, 1.0, z)) == pytest.approx(base / math.sqrt(0.5 / (1 + math.log(2))), rel=1e-13)
    assert float(gs.psi_k(2, 1.0, z)) / base == pytest.approx(1.840, abs=1e-3)
    with pytest.raises(GroundStateError):
        gs.psi_k(1, 0.1, z)


@pytest.mark.parametrize("p", [(3, 0.0, 2.0), (2, 0.5, 2.0), (4, -0.5, 3.0)])
@pytest.mark.parametrize("k", [0, 1])
def test_pde_residual(p, k):
    n = p[0]
    gs = GroundState.build(*p, norm=LiftedNorm(NormSpec.lp(4, n)))
    z = np.append(np.linspace(0.3, 0.6, n), 0.7)
    D = 4.0
    scale = 0.7 ** p[1] * float(gs.psi_k(k, D, z)) / float(gs.norm.dual(z)) ** 2
    assert abs(pde_residual(gs, k, z, D=D)) < 1e-4 * scale


def test_kato_point_residual_and_stencil():
    gs = kato3()
    z = np.array([1.0, 0.0, 0.0, 0.7])
    scale = float(gs.psi(z)) / float(gs.norm.dual(z)) ** 2
    assert abs(pde_residual(gs, 0, z, h=1e-3)) < 1e-4 * scale
    assert abs(pde_residual(gs, 1, z, h=1e-3, D=4.0)) < 1e-4 * scale
    gs2 = GroundState.build(2, 0.5, 2.3)
    z2 = np.array([0.4, -0.9, 0.6])
    assert pde_residual_stencil(gs2, z2) == pytest.approx(pde_residual(gs2, 0, z2), abs=1e-6)


def test_pde_residual_detects_wrong_constant():
    gs = kato3()
    bad = GroundState(ProblemParams(3, 0.0, 2.5), gs.hyper, gs.norm, gs.L, gs.L_method, gs.t_far)
    z = np.array([1.0, 0.0, 0.0, 0.7])
    scale = float(gs.psi(z)) / float(gs.norm.dual(z)) ** 2
    assert abs(pde_residual(bad, 0, z)) > 1e-3 * scale


def test_bc_residual_kato():
    gs = kato3()
    x = np.array([1.0, 0.0, 0.0])
    r1 = bc_residual(gs, 0, x, 1e-4)
    assert abs(r1) < 1e-3 * gs.K
    r2 = bc_residual(gs, 0, x, 5e-5)
    assert abs(r2) < abs(r1)


@pytest.mark.parametrize("p,k", [((2, 0.5, 2.0), 0), ((2, 0.5, 2.0), 1), ((4, -0.5, 3.0), 1)])
def test_bc_residual_extrapolated(p, k):
    gs = GroundState.build(*p)
    x = np.linspace(0.4, 0.5, p[0])
    r = float(gs.norm.base.dual(x))
    scale = gs.K * float(gs.psi_k(k, 4.0, np.append(x, 0.0))) / r ** (1 - p[1])
    assert abs(bc_residual_extrapolated(gs, k, x, 1e-4 * r, 4.0)) < 1e-4 * scale
    with pytest.raises(GroundStateError):
        bc_residual(gs, k, np.zeros(p[0]), 1e-4)
