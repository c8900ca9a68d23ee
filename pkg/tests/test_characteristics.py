import math

import numpy as np
import pytest

from psystem import characteristics as ch
from psystem import evolution as ev
from psystem.constitutive import make_cubic
from psystem.errors import BoundaryDegeneracy, StartNotHyperbolic
from psystem.field import StateField
from psystem.riemann import Family, QTransform, Side


def test_riccati_exact_values():
    assert ch.riccati_exact(1.0, -1.0) is ch.BLOW_UP
    assert ch.riccati_exact(0.0, 5.0) == 0.0
    assert ch.riccati_exact(2.0, 0.25) == pytest.approx(2.0 / 1.5)


def test_riccati_coefficient_closed_forms(quad, cubic):
    assert ch.riccati_coefficient(quad, -1.0) == pytest.approx(-0.25)
    u = -2.0
    assert ch.riccati_coefficient(cubic, u) == pytest.approx(u / (2 * (u * u - 1) ** 1.25))
    assert ch.riccati_coefficient(cubic, 2.0) > 0
    with pytest.raises(BoundaryDegeneracy):
        ch.riccati_coefficient(quad, 0.0)


def test_z_variable(quad):
    qt = QTransform(quad)
    assert ch.z_variable(qt, 2.0, -16.0) == pytest.approx(4.0)
    with pytest.raises(BoundaryDegeneracy):
        ch.z_variable(qt, 1.0, 0.0)


def test_elliptic_start_rejected(quad):
    fld = StateField.from_functions(quad, 16, [0.0, 1.0], lambda t, x: 0.5 + 0 * x)
    with pytest.raises(StartNotHyperbolic):
        ch.trace(fld, (0.0, 0.5))


def test_constant_state_path_is_straight(quad):
    fld = StateField.from_functions(quad, 16, [0.0, 2.0], lambda t, x: -4.0 + 0 * x)
    p1 = ch.trace(fld, (0.0, 0.25), Family.FIRST)
    p2 = ch.trace(fld, (0.0, 0.25), Family.SECOND)
    assert p1.termination is ch.Termination.FIELD_EDGE
    assert p1.x[-1] == pytest.approx(0.25 + 4.0)
    assert p2.x[-1] == pytest.approx(0.25 - 4.0)
    assert np.all(p1.z == 0) and p1.riccati.z0 == 0


def test_ramp_blowup_time(ramp_field):
    # K(t) = (1+t)^(-1/4) - 1, so 1 + z0 K = 0 at t* = (1 - 1/z0)^(-4) - 1
    z0 = 2.0
    t_star = (1 - 1 / z0) ** -4 - 1
    p = ch.trace(ramp_field, (0.0, 0.0), Family.FIRST, z0=z0)
    assert p.termination is ch.Termination.BLOW_UP
    assert p.riccati.predicted_blowup == pytest.approx(t_star, rel=1e-6)
    assert ch.predict_blowup(ramp_field, (0.0, 0.0), z0=z0) == pytest.approx(t_star, rel=1e-6)
    assert ch.predict_blowup(ramp_field, (0.0, 0.0), z0=-1.0) is None


def test_extrapolated_blowup(ramp_field):
    z0 = 2.0
    t_star = (1 - 1 / z0) ** -4 - 1
    p = ch.trace(ramp_field, (0.0, 0.0), Family.FIRST, z0=z0, t_stop=14.5)
    assert p.termination is ch.Termination.FIELD_EDGE
    assert ch._blowup_from_path(p, 0.0) is None
    est = ch._blowup_from_path(p, 0.1)
    assert est == pytest.approx(t_star, rel=1e-2)


def test_riccati_closed_form_matches_integration(wave_field):
    p = ch.trace(wave_field, (0.0, 0.4), Family.SECOND)
    rec = p.riccati
    keep = np.abs(rec.denominator()) > 0.1
    np.testing.assert_allclose(rec.exact()[keep], rec.z_integrated[keep], atol=1e-9)
    # the Riccati variable transported along the path agrees with the one sampled from the field
    np.testing.assert_allclose(rec.z_integrated, p.z, atol=2e-3)


def _boundary_field(quad, C):
    ts = np.linspace(0.0, 2.0, 9)
    return StateField.from_functions(quad, 16, ts, lambda t, x: t - 1.0 + 0 * x, None, winding_C=C)


def test_boundary_hit_and_k_divergence(quad):
    fld = _boundary_field(quad, 0.0)
    depths = []
    for eps in (1e-4, 1e-6, 1e-8):
        p = ch.trace(fld, (0.0, 0.0), Family.FIRST, z0=0.0, eps_par=eps)
        assert p.termination is ch.Termination.BOUNDARY_HIT
        assert p.t_end == pytest.approx(1.0, abs=1e-3)
        depths.append(-p.riccati.k_integral[-1, 1])
    assert depths[0] < depths[1] < depths[2]


def test_sign_rule_violation_measure(quad):
    good = ch.trace(_boundary_field(quad, -0.5), (0.0, 0.0), Family.FIRST)
    # with r_x > 0 the Riccati denominator vanishes before the boundary is reached
    natural = ch.trace(_boundary_field(quad, 0.5), (0.0, 0.0), Family.FIRST)
    assert natural.termination is ch.Termination.BLOW_UP
    assert natural.riccati.predicted_blowup < 1.0
    bad = ch.trace(_boundary_field(quad, 0.5), (0.0, 0.0), Family.FIRST, z0=0.0)
    assert good.termination is bad.termination is ch.Termination.BOUNDARY_HIT
    assert ch.sign_rule_violation(good) == pytest.approx(-0.5)
    assert ch.sign_rule_violation(bad) == pytest.approx(0.5)


def test_classify_constant_and_ramp(quad, ramp_field):
    const = StateField.from_functions(quad, 16, [0.0, 20.0], lambda t, x: -1.0 + 0 * x)
    p = ch.trace(const, (0.0, 0.5))
    assert ch.classify_path(p, 20.0) is ch.CharClass.A_PLUS
    q = ch.trace(ramp_field, (0.0, 0.5))
    assert ch.classify_path(q, 20.0, growth_threshold=5.0) is ch.CharClass.B_PLUS
    short = ch.trace(ramp_field, (0.0, 0.5), t_stop=5.0)
    assert ch.classify_path(short, 20.0, growth_threshold=5.0) is ch.CharClass.UNDETERMINED
    back = ch.trace(const, (20.0, 0.5), direction=ch.Direction.BACKWARD)
    assert ch.classify_path(back, 0.0) is ch.CharClass.A_MINUS


def test_classification_monitor_on_exact_family(quad):
    C = 2.0
    ts = np.linspace(0.5, 20.0, 40)
    fld = StateField.from_functions(quad, 16, ts, lambda t, x: -C * t + 0 * x, None, winding_C=C)
    rep = ch.classification_monitor(fld, n_seeds=4)
    assert rep.flag
    assert rep.counts["First/Forward"]["B"] == 4
    gaps = [r["gap"] for r in rep.intersections]
    assert len(gaps) >= 3
    assert all(b > a for a, b in zip(gaps, gaps[1:]))
    # gap at an intersection equals 2 q(u) = (4/3) (C t)^(3/2)
    r = rep.intersections[-1]
    assert r["gap"] == pytest.approx(4 / 3 * (C * r["t_k"]) ** 1.5, rel=1e-6)


def test_classification_monitor_constant_field(quad):
    fld = StateField.from_functions(quad, 16, [0.0, 10.0], lambda t, x: -1.0 + 0 * x)
    rep = ch.classification_monitor(fld, n_seeds=4)
    assert not rep.flag
    assert rep.counts["First/Forward"]["A"] == 4


def test_beta_side_tracing():
    m = make_cubic()
    n = 64
    x = np.arange(n) / n
    fld, _ = ev.run(m, 2.0 + 0.1 * np.sin(2 * np.pi * x), np.zeros(n), 0.3, save_every=2)
    p = ch.trace(fld, (0.0, 0.2), Family.FIRST)
    assert p.side is Side.BETA
    assert np.all(p.k > 0)
    keep = np.abs(p.riccati.denominator()) > 0.1
    np.testing.assert_allclose(p.riccati.exact()[keep], p.riccati.z_integrated[keep], atol=1e-9)


def test_earliest_blowup_on_simple_wave_oracle(quad):
    # simple wave with one invariant constant: blow-up time is min over x of -1/(z0 k) on the
    # initial line since u (hence k) is constant along the carrying characteristic
    from psystem.scenarios import initial_data
    n = 256
    u0, v0, C, t0 = initial_data(quad, "simple_wave", n, {"u_mean": -1.5, "u_amp": 0.2})
    fld, rep = ev.run(quad, u0, v0, 10.0, save_every=4)
    assert rep.stop_reason is ev.StopReason.BLOW_UP
    fam = Family.SECOND
    x = fld.x
    ux = fld.UX[0]
    vx = fld.VX[0]
    lam = fam.sign * np.sqrt(-u0)
    z0 = (vx + lam * ux) * (-u0) ** 0.25
    k = -1.0 / (4 * (-u0) ** 1.25)
    with np.errstate(divide="ignore"):
        cand = np.where(z0 * k < 0, -1.0 / (z0 * k), np.inf)
    oracle = float(cand.min())
    best, _ = ch.earliest_blowup(fld, x[::4], families=(fam,), extrapolate=0.2)
    assert best == pytest.approx(oracle, rel=2e-3)
    assert rep.blowup_time == pytest.approx(oracle, rel=0.05)
