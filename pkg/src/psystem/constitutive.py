"""Constitutive laws sigma(u) and pointwise type classification.

Two families are supported: a convex law with a single minimum (type I) and a
cubic-like law whose derivative changes sign twice (type II).  A type I law is
stored as a type II law with ``alpha == beta`` so downstream code only ever
branches on region tags.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

EPS_PAR = 1e-10


class Kind(str, enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    CUSTOM = "Custom"


class PointClass(str, enum.Enum):
    HYPERBOLIC_ALPHA = "Hyperbolic_alpha"
    HYPERBOLIC_BETA = "Hyperbolic_beta"
    ELLIPTIC = "Elliptic"
    BOUNDARY = "Boundary"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "PointClass":
        return _FROM_CODE[int(code)]


_CODES = {
    PointClass.HYPERBOLIC_ALPHA: 0,
    PointClass.HYPERBOLIC_BETA: 1,
    PointClass.ELLIPTIC: 2,
    PointClass.BOUNDARY: 3,
}
_FROM_CODE = {v: k for k, v in _CODES.items()}


@dataclass(frozen=True)
class SigmaModel:
    """Stress-strain law with its first two derivatives.

    The three callables accept scalars or numpy arrays.  ``poly`` holds the
    coefficients of sigma (highest degree first, ``numpy.polyval`` order) when
    the law is polynomial; compiled kernels use it, other laws take the
    pure-Python path.
    """

    kind: Kind
    alpha: float
    beta: float
    sigma: Callable = field(repr=False, compare=False)
    dsigma: Callable = field(repr=False, compare=False)
    d2sigma: Callable = field(repr=False, compare=False)
    name: str = "custom"
    poly: Optional[tuple] = None

    def __post_init__(self):
        if self.alpha > self.beta:
            raise ValueError(f"alpha={self.alpha} must not exceed beta={self.beta}")

    def eval(self, u):
        """Return ``(sigma, sigma', sigma'')`` at ``u``."""
        return self.sigma(u), self.dsigma(u), self.d2sigma(u)

    @property
    def dpoly(self) -> Optional[np.ndarray]:
        if self.poly is None:
            return None
        return np.polyder(np.asarray(self.poly, dtype=float), 1)

    @property
    def d2poly(self) -> Optional[np.ndarray]:
        if self.poly is None:
            return None
        return np.polyder(np.asarray(self.poly, dtype=float), 2)


def make_polynomial(coeffs: Sequence[float], alpha: float, beta: float,
                    kind: Kind = Kind.CUSTOM, name: str = "polynomial") -> SigmaModel:
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size < 2:
        raise ValueError("polynomial law needs at least two coefficients")
    d1 = np.polyder(c, 1)
    d2 = np.polyder(c, 2) if c.size > 2 else np.zeros(1)
    return SigmaModel(
        kind=kind,
        alpha=float(alpha),
        beta=float(beta),
        sigma=lambda u: np.polyval(c, u),
        dsigma=lambda u: np.polyval(d1, u),
        d2sigma=lambda u: np.polyval(d2, u),
        name=name,
        poly=tuple(float(a) for a in c),
    )


def make_quadratic() -> SigmaModel:
    """sigma(u) = u**2 / 2, type I with its minimum at 0."""
    return make_polynomial([0.5, 0.0, 0.0], 0.0, 0.0, Kind.TYPE_I, "quadratic")


def make_cubic() -> SigmaModel:
    """sigma(u) = u - u**3 / 3, type II with alpha = -1, beta = 1."""
    return make_polynomial([-1.0 / 3.0, 0.0, 1.0, 0.0], -1.0, 1.0, Kind.TYPE_II, "cubic")


def make_custom(sigma: Callable, dsigma: Callable, d2sigma: Callable,
                alpha: float, beta: float, name: str = "custom") -> SigmaModel:
    return SigmaModel(Kind.CUSTOM, float(alpha), float(beta), sigma, dsigma, d2sigma, name)


def eigenvalues(model: SigmaModel, u: float, eps: float = EPS_PAR):
    """Characteristic speeds at ``u``; ``(None, None)`` in the elliptic region."""
    d1 = float(model.dsigma(u))
    if d1 > eps:
        return None, None
    lam = math.sqrt(max(-d1, 0.0))
    return lam, -lam


def classify(model: SigmaModel, u: float, eps: float = EPS_PAR) -> PointClass:
    return PointClass.from_code(int(classify_codes(model, np.asarray(u, dtype=float), eps)))


def classify_codes(model: SigmaModel, u, eps: float = EPS_PAR) -> np.ndarray:
    """Vectorised :func:`classify` returning integer codes (see ``PointClass.code``)."""
    u = np.asarray(u, dtype=float)
    d1 = np.asarray(model.dsigma(u), dtype=float)
    codes = np.where(u < model.alpha, 0, 1)
    codes = np.where(d1 > 0.0, 2, codes)
    codes = np.where(np.abs(d1) <= eps, 3, codes)
    return codes


def validate(model: SigmaModel, n_samples: int = 1000, pad: float = 5.0,
             eps: float = EPS_PAR) -> list[str]:
    """Check the type I / type II sign pattern on a dense sample.

    Returns a list of human-readable problems; empty means the law passed.
    """
    a, b = model.alpha, model.beta
    u = np.linspace(a - pad, b + pad, n_samples)
    _, d1, d2 = (np.asarray(x, dtype=float) * np.ones_like(u) for x in model.eval(u))
    band = np.abs(d1) <= eps
    problems = []
    left = (u < a) & ~band
    right = (u > b) & ~band
    mid = (u > a) & (u < b) & ~band
    if np.any(d1[left] >= 0):
        problems.append("sigma' must be negative for u < alpha")
    if a == b:
        if np.any(d1[right] <= 0):
            problems.append("type I: sigma' must be positive for u > alpha")
        if np.any(d2 <= 0):
            problems.append("type I: sigma'' must be positive")
    else:
        if np.any(d1[right] >= 0):
            problems.append("sigma' must be negative for u > beta")
        if np.any(d1[mid] <= 0):
            problems.append("sigma' must be positive on (alpha, beta)")
        if np.any(d2[u <= a] <= 0):
            problems.append("sigma'' must be positive for u <= alpha")
        if np.any(d2[u >= b] >= 0):
            problems.append("sigma'' must be negative for u >= beta")
    for anchor in {a, b}:
        if abs(float(model.dsigma(anchor))) > eps:
            problems.append(f"sigma'({anchor}) must vanish")
    return problems
