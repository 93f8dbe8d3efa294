import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finsler_hardy.finsler_core import NormSpec
from finsler_hardy.ground_state import ProblemParams
from finsler_hardy.quadrature import DomainSpec, QuadratureError
from finsler_hardy.verifier import (
    TestFunction,
    bump,
    bump_corpus,
    deficit_cone,
    deficit_interpolation,
    deficit_series,
    support_inside,
    zero_function,
)

E2 = NormSpec.euclidean(2)
P = ProblemParams(2, 0.0, 2.0)
BALL = DomainSpec.wulff_half_ball(E2, 1.0)
BUMP = TestFunction((0.3, 0.0, 0.5), (0.15, 0.15, 0.2))
EDGE = TestFunction((0.4, 0.1, 0.0), (0.2, 0.2, 0.3))


def test_bump_profile():
    v, dv = bump(np.array([-1.0, 0.0, 0.5, 1.2]))
    assert v[1] == 1.0 and v[0] == 0.0 and v[3] == 0.0
    assert v[2] == pytest.approx(math.exp(1 - 1 / 0.75))
    assert dv[2] == pytest.approx(v[2] * -1.0 / 0.75 ** 2)


@pytest.mark.parametrize("u", [BUMP, EDGE])
def test_gradient_matches_finite_differences(u):
    rng = np.random.default_rng(4)
    lo, hi = u.support_box()
    z = lo + (hi - lo) * rng.uniform(0.2, 0.8, (20, 3))
    g = u.gradient(z)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (u.value(z + e) - u.value(z - e)) / (2 * h)
        assert np.allclose(g[:, i], fd, rtol=1e-6, atol=1e-7)


def test_cone_frame_gradient():
    th = math.pi / 6
    u = TestFunction((0.4, 0.2, 0.0), (0.15, 0.15, 0.2), 1.0, "cone", th, E2)
    q = np.array([[0.45, 0.18, 0.05], [0.35, 0.25, 0.1]])
    z, _, g = u.evaluate(q)
    h = 1e-6
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (u.value(z + e) - u.value(z - e)) / (2 * h)
        assert np.allclose(g[:, i], fd, rtol=1e-6, atol=1e-8)


def test_interpolation_deficit_positive():
    r = deficit_interpolation(BUMP, P, E2, BALL)
    assert r.deficit > 0 and r.passed and r.verdict == "PASS"
    assert r.trace_term == 0.0  # support away from y = 0
    r = deficit_interpolation(EDGE, P, E2, BALL)
    assert r.trace_term > 0 and r.deficit > 0
    assert r.deficit == pytest.approx(r.energy - r.trace_term - r.hardy_term, rel=1e-14)


def test_zero_function_reports_zeros():
    r = deficit_series(zero_function(3), P, E2, BALL, 2)
    assert (r.energy, r.trace_term, r.hardy_term, r.deficit) == (0.0, 0.0, 0.0, 0.0)
    assert all(t == 0.0 for t in r.remainder_terms)
    cone = DomainSpec.cone(E2, math.pi / 6)
    r = deficit_cone(zero_function(3, "cone", math.pi / 6, E2), 2, 2.0, math.pi / 6, E2, cone)
    assert r.deficit == 0.0 and r.energy == 0.0


@settings(max_examples=15)
@given(lam=st.floats(0.01, 100.0))
def test_quadratic_homogeneity(lam):
    p = ProblemParams(2, 0.3, 2.4)
    a = deficit_series(EDGE, p, E2, BALL, 2)
    b = deficit_series(EDGE.scaled(lam), p, E2, BALL, 2)
    for x, y in [(a.energy, b.energy), (a.trace_term, b.trace_term), (a.hardy_term, b.hardy_term),
                 *zip(a.remainder_terms, b.remainder_terms)]:
        assert y == pytest.approx(lam * lam * x, rel=1e-12)
    assert b.deficit == pytest.approx(lam * lam * a.deficit, rel=1e-10)


def test_series_terms_and_reduction():
    p = ProblemParams(2, 0.0, 2.5)
    r0 = deficit_interpolation(EDGE, p, E2, BALL)
    rk0 = deficit_series(EDGE, p, E2, BALL, 0)
    assert rk0.deficit == r0.deficit and rk0.remainder_terms == ()
    r3 = deficit_series(EDGE, p, E2, BALL, 3)
    rem = r3.remainder_terms
    assert len(rem) == 3 and rem[0] > rem[1] > rem[2] > 0
    assert 0 < r3.deficit < r0.deficit
    total = r3.energy - r3.trace_term - r3.hardy_term - sum(rem)
    assert r3.deficit == pytest.approx(total, rel=1e-13)


def test_structural_zero_hardy():
    r = deficit_interpolation(EDGE, ProblemParams(2, 0.5, 1.5), E2, BALL)
    assert r.hardy_structural_zero and r.hardy_term == 0.0
    r = deficit_interpolation(EDGE, ProblemParams(2, 0.0, 2.5), E2, BALL)
    assert not r.hardy_structural_zero and r.hardy_term > 0


@pytest.mark.parametrize("k", [0, 2])
@pytest.mark.parametrize("p", [ProblemParams(2, 0.0, 2.0), ProblemParams(2, 0.5, 2.2), ProblemParams(2, -0.5, 2.9)])
def test_picone_consistency(p, k):
    r = deficit_series(EDGE, p, NormSpec.lp(4, 2), BALL, k, picone=True)
    assert r.picone_gap <= r.quadrature_error + r.picone_error + 1e-9 * r.energy


def test_cone_deficit_and_small_angle():
    th = math.pi / 6
    cone = DomainSpec.cone(E2, th)
    u = TestFunction((0.4, 0.2, 0.0), (0.15, 0.15, 0.2), 1.0, "cone", th, E2)
    r = deficit_cone(u, 2, 2.0, th, E2, cone, picone=True)
    assert r.deficit > 0 and r.picone_gap < 1e-6 * r.energy
    # theta -> 0: the cone frame becomes the half-space frame
    half = deficit_series(EDGE, ProblemParams(2, 0.0, 2.3), E2, BALL, 1)
    gaps = []
    for t in (1e-2, 1e-3, 1e-4):
        c = DomainSpec.cone(E2, t)
        v = TestFunction(EDGE.center, EDGE.widths, 1.0, "cone", t, E2)
        gaps.append(abs(deficit_cone(v, 2, 2.3, t, E2, c, k=1).deficit - half.deficit))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3 * half.energy


def test_support_checks():
    outside = TestFunction((0.9, 0.0, 0.3), (0.2, 0.2, 0.2))
    assert not support_inside(outside, BALL)
    with pytest.raises(QuadratureError):
        deficit_interpolation(outside, P, E2, BALL)
    with pytest.raises(QuadratureError):
        deficit_cone(BUMP, 2, 2.0, 0.5, E2, DomainSpec.cone(E2, 0.5))
    with pytest.raises(QuadratureError):
        deficit_series(BUMP, P, E2, DomainSpec.cone(E2, 0.5), 0)


@pytest.mark.parametrize("dom", [BALL, DomainSpec.cylinder(NormSpec.lp(4, 2), 1.0, 0.8),
                                 DomainSpec.cone(E2, math.pi / 6)])
def test_corpus_determinism_and_support(dom):
    a = bump_corpus(dom, 12, seed=5)
    b = bump_corpus(dom, 12, seed=5)
    assert a == b
    assert a != bump_corpus(dom, 12, seed=6)
    assert all(support_inside(u, dom) for u in a)
    assert any(u.touches_boundary for u in a)
