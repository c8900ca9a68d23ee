import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from psystem.constitutive import make_cubic, make_quadratic
from psystem.errors import BoundaryDegeneracy, OutOfRange, WrongSide
from psystem.riemann import (Family, QTransform, RiemannPair, Side, adaptive_gauss, from_riemann,
                             genuine_nonlinearity, invariant_for_family, q_eval, q_inverse, q_prime,
                             side_of, to_riemann)


def q_quadratic(u):
    return 2.0 / 3.0 * (-u) ** 1.5


def q_cubic(u):
    a = abs(u)
    r = math.sqrt(a * a - 1.0)
    return 0.5 * (a * r - math.log(a + r))


def test_adaptive_gauss_smooth_integrands():
    assert adaptive_gauss(lambda s: s ** 5, 0.0, 2.0, 1e-13) == pytest.approx(64 / 6, rel=1e-14)
    assert adaptive_gauss(np.exp, 0.0, 3.0, 1e-12) == pytest.approx(math.exp(3.0) - 1.0, rel=1e-13)


@pytest.mark.parametrize("u,q", [(-1.0, 2 / 3), (-4.0, 16 / 3), (0.0, 0.0)])
def test_q_quadratic_values(u, q):
    assert q_eval(QTransform(make_quadratic()), u) == pytest.approx(q, abs=1e-13)


@pytest.mark.parametrize("u", [-1.0001, -1.3, -2.0, -7.5])
def test_q_cubic_alpha_closed_form(u):
    assert q_eval(QTransform(make_cubic(), Side.ALPHA), u) == pytest.approx(q_cubic(u), rel=1e-11, abs=1e-14)


@pytest.mark.parametrize("u", [1.0001, 1.3, 2.0, 7.5])
def test_q_cubic_beta_closed_form(u):
    assert q_eval(QTransform(make_cubic(), Side.BETA), u) == pytest.approx(q_cubic(u), rel=1e-11, abs=1e-14)


def test_q_inverse_known_points():
    qt = QTransform(make_quadratic())
    assert q_inverse(qt, 2 / 3) == pytest.approx(-1.0, abs=1e-12)
    assert q_inverse(qt, 16 / 3) == pytest.approx(-4.0, abs=1e-12)
    assert q_inverse(qt, 0.0) == 0.0
    with pytest.raises(OutOfRange):
        q_inverse(qt, -1.0)


def test_q_prime_sign_per_side():
    m = make_cubic()
    assert q_prime(QTransform(m, Side.ALPHA), -2.0) == pytest.approx(-math.sqrt(3))
    assert q_prime(QTransform(m, Side.BETA), 2.0) == pytest.approx(math.sqrt(3))


def test_wrong_side_rejected():
    with pytest.raises(WrongSide):
        q_eval(QTransform(make_cubic(), Side.BETA), -2.0)


def test_from_riemann_rejects_crossed_pair():
    with pytest.raises(OutOfRange):
        from_riemann(QTransform(make_quadratic()), RiemannPair(1.0, 0.0))


def test_side_and_pairing(cubic):
    assert side_of(cubic, -2.0) is Side.ALPHA
    assert side_of(cubic, 2.0) is Side.BETA
    with pytest.raises(BoundaryDegeneracy):
        side_of(cubic, 0.0)
    assert invariant_for_family(Side.ALPHA, Family.FIRST) == "r1"
    assert invariant_for_family(Side.BETA, Family.FIRST) == "r2"
    assert invariant_for_family(Side.BETA, Family.SECOND) == "r1"


def test_genuine_nonlinearity_values(quad, cubic):
    assert genuine_nonlinearity(quad, -1.0) == pytest.approx(-0.25)
    # sigma'' / (4 sigma') = -2u / (4 (1 - u^2))
    assert genuine_nonlinearity(cubic, 2.0) == pytest.approx(-4.0 / (4 * -3.0))
    with pytest.raises(BoundaryDegeneracy):
        genuine_nonlinearity(quad, 0.0)


def _hyperbolic_point(model_name, side):
    model = make_quadratic() if model_name == "quadratic" else make_cubic()
    anchor = model.alpha if side is Side.ALPHA else model.beta
    o = -1.0 if side is Side.ALPHA else 1.0
    return model, anchor, o


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([("quadratic", Side.ALPHA), ("cubic", Side.ALPHA), ("cubic", Side.BETA)]),
       st.floats(0.05, 5.0), st.floats(-10.0, 10.0))
def test_round_trip(case, dist, v):
    model, anchor, o = _hyperbolic_point(*case)
    qt = QTransform(model, case[1])
    u = anchor + o * dist
    r = to_riemann(qt, u, v)
    assert r.r1 <= r.r2
    u2, v2 = from_riemann(qt, r)
    assert u2 == pytest.approx(u, abs=1e-10)
    assert v2 == pytest.approx(v, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([("quadratic", Side.ALPHA), ("cubic", Side.ALPHA), ("cubic", Side.BETA)]),
       st.floats(0.01, 4.0), st.floats(0.01, 4.0))
def test_q_monotone_away_from_anchor(case, d1, d2):
    model, anchor, o = _hyperbolic_point(*case)
    qt = QTransform(model, case[1])
    a, b = sorted((d1, d2))
    assert q_eval(qt, anchor + o * a) <= q_eval(qt, anchor + o * b) + 1e-15
