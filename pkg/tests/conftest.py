import numpy as np
import pytest

from psystem import evolution as ev
from psystem.constitutive import make_cubic, make_quadratic
from psystem.field import StateField


@pytest.fixture(scope="session")
def quad():
    return make_quadratic()


@pytest.fixture(scope="session")
def cubic():
    return make_cubic()


@pytest.fixture(scope="session")
def wave_field(quad):
    """Short smooth hyperbolic solver run on the quadratic law."""
    n = 64
    x = np.arange(n) / n
    fld, _ = ev.run(quad, -1.0 + 0.1 * np.sin(2 * np.pi * x), 0.05 * np.cos(2 * np.pi * x), 1.0,
                    save_every=2)
    return fld


@pytest.fixture(scope="session")
def ramp_field(quad):
    """u = -1 - t, v = 0 on [0, 20]; characteristics have closed forms."""
    ts = np.linspace(0.0, 20.0, 81)
    return StateField.from_functions(quad, 16, ts, lambda t, x: -1.0 - t + 0 * x)
