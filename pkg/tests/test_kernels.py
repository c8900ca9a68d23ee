import os
import subprocess
import sys

import numpy as np
import pytest

from psystem import _kernels_py, kernels
from psystem.characteristics import Direction, trace
from psystem.riemann import Family

needs_compiled = pytest.mark.skipif(not kernels.HAVE_COMPILED, reason="extension not built")


def test_python_backend_selectable():
    assert kernels.backend("python") is _kernels_py
    with pytest.raises(ValueError):
        kernels.backend("fortran")


def test_env_forces_fallback():
    out = subprocess.run([sys.executable, "-c", "import psystem; print(psystem.active_backend())"],
                         env={**os.environ, "PSYSTEM_BACKEND": "python"},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_interp_reproduces_grid_values(wave_field):
    mod = kernels.backend()
    f = wave_field
    for j in (0, 5, 63):
        assert mod.interp(f.times, f.U, f.UX, f.times[3], j / f.n_x) == pytest.approx(f.U[3, j], abs=1e-14)


@needs_compiled
@pytest.mark.parametrize("family", [Family.FIRST, Family.SECOND])
def test_trace_parity(wave_field, family):
    a = trace(wave_field, (0.0, 0.3), family, backend="cython")
    b = trace(wave_field, (0.0, 0.3), family, backend="python")
    assert a.termination is b.termination
    assert a.t.shape == b.t.shape
    np.testing.assert_allclose(a.x, b.x, atol=1e-12)
    np.testing.assert_allclose(a.riccati.k_integral, b.riccati.k_integral, atol=1e-12)
    np.testing.assert_allclose(a.riccati.z_integrated, b.riccati.z_integrated, atol=1e-12)


@needs_compiled
def test_trace_parity_backward(wave_field):
    a = trace(wave_field, (1.0, 0.7), Family.FIRST, Direction.BACKWARD, backend="cython")
    b = trace(wave_field, (1.0, 0.7), Family.FIRST, Direction.BACKWARD, backend="python")
    np.testing.assert_allclose(a.x, b.x, atol=1e-12)
    assert a.t[-1] == pytest.approx(0.0)


@needs_compiled
def test_flow_parity(wave_field):
    f = wave_field
    args = (f.times, f.UX, f.UXX, 0.0, 0.0, 0.2, 0.8, 1e-3, 900)
    ta, xa, pa, oka = kernels.backend("cython").flow(*args)
    tb, xb, pb, okb = kernels.backend("python").flow(*args)
    assert oka and okb
    np.testing.assert_allclose(xa, xb, atol=1e-12)
    np.testing.assert_allclose(pa, pb, atol=1e-12)


def _ramp_errors(ramp_field, dt, backend):
    p = trace(ramp_field, (0.0, 0.1), Family.FIRST, dt=dt, z0=0.5, t_stop=3.0, backend=backend)
    t = p.t
    x_exact = 0.1 + 2.0 / 3.0 * ((1.0 + t) ** 1.5 - 1.0)
    k_exact = (1.0 + t) ** -0.25 - 1.0
    return np.max(np.abs(p.x - x_exact)), np.max(np.abs(p.riccati.k_integral[:, 1] - k_exact))


@pytest.mark.parametrize("backend", ["python"] + (["cython"] if kernels.HAVE_COMPILED else []))
def test_tracer_fourth_order(ramp_field, backend):
    ex1, ek1 = _ramp_errors(ramp_field, 0.2, backend)
    ex2, ek2 = _ramp_errors(ramp_field, 0.1, backend)
    assert 12.0 < ex1 / ex2 < 20.0
    assert 12.0 < ek1 / ek2 < 20.0
