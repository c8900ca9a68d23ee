import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psystem.constitutive import (EPS_PAR, PointClass, classify, classify_codes, eigenvalues,
                                  make_custom, make_polynomial, validate)


def test_quadratic_values(quad):
    assert quad.eval(-2.0) == (2.0, -2.0, 1.0)
    assert quad.alpha == quad.beta == 0.0


def test_cubic_values(cubic):
    s, d1, d2 = cubic.eval(2.0)
    assert s == pytest.approx(2 - 8 / 3)
    assert d1 == pytest.approx(-3.0)
    assert d2 == pytest.approx(-4.0)


def test_eigenvalues(quad, cubic):
    assert eigenvalues(quad, -4.0) == (2.0, -2.0)
    assert eigenvalues(quad, 1.0) == (None, None)
    lam, mu = eigenvalues(cubic, 2.0)
    assert lam == pytest.approx(math.sqrt(3)) and mu == -lam


@pytest.mark.parametrize("u,expected", [
    (-1.0, PointClass.HYPERBOLIC_ALPHA),
    (0.0, PointClass.BOUNDARY),
    (0.5, PointClass.ELLIPTIC),
])
def test_classify_quadratic(quad, u, expected):
    assert classify(quad, u) is expected


@pytest.mark.parametrize("u,expected", [
    (-2.0, PointClass.HYPERBOLIC_ALPHA),
    (-1.0, PointClass.BOUNDARY),
    (0.0, PointClass.ELLIPTIC),
    (1.0, PointClass.BOUNDARY),
    (3.0, PointClass.HYPERBOLIC_BETA),
])
def test_classify_cubic(cubic, u, expected):
    assert classify(cubic, u) is expected


def test_classify_codes_vectorised(cubic):
    u = np.array([-2.0, -1.0, 0.0, 1.0, 3.0])
    assert classify_codes(cubic, u).tolist() == [0, 3, 2, 3, 1]
    assert [PointClass.from_code(c).code for c in range(4)] == [0, 1, 2, 3]


def test_boundary_band_width(cubic):
    # sigma'(u) = 1 - u^2; inside the band |sigma'| <= eps
    u = -math.sqrt(1 + 0.5 * EPS_PAR)
    assert classify(cubic, u) is PointClass.BOUNDARY


def test_validate_shipped_laws(quad, cubic):
    assert validate(quad) == []
    assert validate(cubic) == []


def test_validate_rejects_wrong_sign_pattern():
    bad = make_polynomial([1.0 / 3.0, 0.0, -1.0, 0.0], -1.0, 1.0)  # elliptic outside, hyperbolic inside
    assert validate(bad)


def test_alpha_above_beta_rejected():
    with pytest.raises(ValueError):
        make_custom(math.sin, math.cos, math.sin, 1.0, 0.0)


@given(st.floats(-50, 50, allow_nan=False))
def test_classification_matches_speed_existence(u):
    from psystem.constitutive import make_cubic
    m = make_cubic()
    code = int(classify_codes(m, u))
    lam, _ = eigenvalues(m, u)
    if code in (0, 1):
        assert lam is not None and lam > 0
    if code == 2:
        assert lam is None
