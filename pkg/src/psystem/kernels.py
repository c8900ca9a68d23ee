"""Kernel backend selection.

The compiled extension is used when it imports and the law is polynomial;
otherwise the pure-Python reference runs.  ``PSYSTEM_BACKEND=python`` forces
the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if os.environ.get("PSYSTEM_BACKEND", "").lower() == "python":
    _compiled = None

FIELD_EDGE = _kernels_py.FIELD_EDGE
BOUNDARY_HIT = _kernels_py.BOUNDARY_HIT
BLOW_UP = _kernels_py.BLOW_UP
STEP_FAILURE = _kernels_py.STEP_FAILURE

HAVE_COMPILED = _compiled is not None


def backend(name: str | None = None):
    """Return the kernel module for ``name`` ("cython", "python" or None for best)."""
    if name is None:
        return _compiled if _compiled is not None else _kernels_py
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def active_backend() -> str:
    return backend().BACKEND
