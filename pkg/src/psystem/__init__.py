"""Numerical toolkit for the p-system u_t = -v_x, v_t = sigma(u)_x on the circle."""
from .constitutive import SigmaModel, make_cubic, make_quadratic
from .field import StateField
from .kernels import active_backend

__version__ = "0.1.0"

__all__ = ["SigmaModel", "StateField", "make_cubic", "make_quadratic", "active_backend",
           "__version__"]
