import numpy as np
import pytest

from psystem import hamiltonian as hm
from psystem.constitutive import make_quadratic
from psystem.errors import NoConvergence
from psystem.field import StateField

COS = hm.AnalyticPotential(lambda t, x: 0.1 * np.cos(2 * np.pi * x),
                           lambda t, x: -0.2 * np.pi * np.sin(2 * np.pi * x))


def test_free_particle():
    tr = hm.flow(hm.constant_potential(0.0), (0.0, 0.0, 1.0), 2.0)
    np.testing.assert_allclose(tr.x, tr.t, atol=1e-14)
    np.testing.assert_allclose(tr.p, 1.0)


def test_constant_potential_is_free():
    tr = hm.flow(hm.constant_potential(3.0), (0.0, 0.2, -0.5), 1.0)
    assert tr.x[-1] == pytest.approx(0.2 - 0.5)
    np.testing.assert_allclose(tr.H, 0.125 + 3.0)


def test_time_dependent_potential():
    pot = hm.AnalyticPotential(lambda t, x: -2 * t + 0 * x, lambda t, x: 0 * x)
    tr = hm.flow(pot, (0.0, 0.1, 0.7), 3.0, v=lambda t, x: 2 * x)
    np.testing.assert_allclose(tr.x, 0.1 + 0.7 * tr.t, atol=1e-13)
    assert np.ptp(tr.H) == pytest.approx(6.0)
    assert hm.f_drift(pot, lambda t, x: 2 * x, tr) < 1e-9


def test_energy_conserved_for_static_potential():
    tr = hm.flow(COS, (0.0, 0.3, 0.4), 10.0)
    assert np.max(np.abs(tr.H - tr.H[0])) < 1e-9


def test_negative_control_drift_converged():
    pot = hm.AnalyticPotential(lambda t, x: np.sin(2 * np.pi * x), lambda t, x: 2 * np.pi * np.cos(2 * np.pi * x))
    zero = lambda t, x: 0 * x
    d1 = hm.f_drift(pot, zero, hm.flow(pot, (0.0, 0.0, 1.0), 1.0, dt=1e-3))
    d2 = hm.f_drift(pot, zero, hm.flow(pot, (0.0, 0.0, 1.0), 1.0, dt=1e-4))
    assert d1 >= 0.01
    assert d1 == pytest.approx(d2, rel=1e-3)


def test_field_flow_matches_analytic():
    m = make_quadratic()
    fld = StateField.from_functions(m, 64, [0.0], lambda t, x: 0.1 * np.cos(2 * np.pi * x))
    a = hm.flow(hm.FieldPotential(fld), (0.0, 0.3, 0.4), 2.0)
    b = hm.flow(COS, (0.0, 0.3, 0.4), 2.0)
    np.testing.assert_allclose(a.x, b.x, atol=1e-6)


@pytest.mark.parametrize("m,n,speed", [(1, 1, 1.0), (2, 1, 0.5), (1, 0, 0.0), (3, -2, -2 / 3)])
def test_free_orbits(m, n, speed):
    o = hm.find_mn_orbit(hm.constant_potential(0.0), m, n, x0=0.25)
    np.testing.assert_allclose(o.trajectory.p, speed, atol=1e-12)
    np.testing.assert_allclose(o.trajectory.x, 0.25 + speed * o.trajectory.t, atol=1e-12)
    dx, dp = o.seam_error()
    assert dx <= 1e-6 and dp <= 1e-6


def test_orbit_matches_shooting_oracle():
    o = hm.find_mn_orbit(COS, 1, 1, x0=0.1)
    x0 = o.trajectory.x[0]
    p0, tr = hm.shoot(COS, 0.0, x0, x0 + 1.0, 1.0, o.p_legendre[0])
    assert abs(p0 - o.p_legendre[0]) < 1e-5
    x_shoot = np.interp(o.trajectory.t, tr.t, tr.x)
    assert np.max(np.abs(x_shoot - o.trajectory.x)) < 1e-5
    # the endpoint map of the continuous flow closes the loop
    assert abs(tr.p[-1] - p0) < 1e-5


def test_orbit_no_convergence():
    with pytest.raises(NoConvergence):
        hm.find_mn_orbit(COS, 1, 1, max_iter=1, tol=1e-30)


def test_reduction_planted_values():
    zero_u = hm.constant_potential(0.0)
    o20 = hm.find_mn_orbit(zero_u, 2, 0)
    r = hm.reduction_check(zero_u, lambda t, x: 3.0 * t + 0 * x, [o20], t_range=(0.0, 2.0))
    assert r.A == pytest.approx(3.0) and r.B == pytest.approx(0.0, abs=1e-12)
    assert r.max_mismatch == pytest.approx(6.0)
    o11 = hm.find_mn_orbit(zero_u, 1, 1)
    r = hm.reduction_check(zero_u, lambda t, x: 2.0 * x + 0.2 * np.sin(2 * np.pi * x), [o11])
    assert r.per_orbit[0]["mismatch"] == pytest.approx(2.0, abs=1e-9)
    assert r.per_orbit[0]["seam_dv"] == pytest.approx(2.0, abs=1e-9)


def test_decomposition_residual_is_periodic():
    v = lambda t, x: 0.5 * t - x + 0.3 * np.cos(2 * np.pi * (x + t))
    d = hm.decompose_v(v, (0.0, 1.0))
    assert d.A == pytest.approx(0.5, abs=1e-12) and d.B == pytest.approx(-1.0, abs=1e-12)
    tt = np.array([0.1, 0.4])
    np.testing.assert_allclose(d.v_tilde(tt, 0.2), d.v_tilde(tt + 1.0, 1.2) - 0.0, atol=1e-12)
