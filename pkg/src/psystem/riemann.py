"""Riemann invariants of the p-system inside one hyperbolic component.

On the component left of ``alpha`` the transform is

    q(u) = int_u^alpha sqrt(-sigma'(s)) ds,     r1 = v - q(u),  r2 = v + q(u),

and on the component right of ``beta`` it is mirrored,
``q(u) = int_beta^u sqrt(-sigma'(s)) ds`` with the same ``r1``/``r2`` formulas,
so that ``r2 - r1 = 2 q >= 0`` on both sides.  With this convention ``r1`` is
carried by the first family on the alpha side and by the second family on the
beta side; :func:`invariant_for_family` encodes the pairing.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .constitutive import EPS_PAR, SigmaModel
from .errors import BoundaryDegeneracy, OutOfRange, QuadratureFailure, WrongSide

QUAD_TOL = 1e-10
TOL_INV = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


class Side(str, enum.Enum):
    ALPHA = "AlphaSide"
    BETA = "BetaSide"


class Family(str, enum.Enum):
    FIRST = "First"
    SECOND = "Second"

    @property
    def sign(self) -> int:
        return 1 if self is Family.FIRST else -1


def side_of(model: SigmaModel, u: float, eps: float = EPS_PAR) -> Side:
    """Hyperbolic component containing ``u`` (raises inside the band or elliptic zone)."""
    if -float(model.dsigma(u)) <= eps:
        raise BoundaryDegeneracy(f"u={u} is not strictly hyperbolic")
    return Side.ALPHA if u < model.alpha else Side.BETA


def invariant_for_family(side: Side, family: Family) -> str:
    """Name (``"r1"`` or ``"r2"``) of the invariant transported by ``family``."""
    first = side is Side.ALPHA
    if family is Family.FIRST:
        return "r1" if first else "r2"
    return "r2" if first else "r1"


def adaptive_gauss(f, a: float, b: float, tol: float, max_depth: int = 40) -> float:
    """Adaptive composite 16-point Gauss-Legendre quadrature of a vectorised ``f``.

    Each panel is accepted when its single-panel estimate agrees with the
    two-half-panel estimate to within the panel's share of ``tol``.
    """
    if a == b:
        return 0.0
    total = 0.0
    stack = [(a, b, tol, 0)]
    while stack:
        lo, hi, ptol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        # one call for the whole panel and both halves
        x = np.concatenate([
            mid + h * _GL_NODES,
            0.5 * (lo + mid) + 0.5 * h * _GL_NODES,
            0.5 * (mid + hi) + 0.5 * h * _GL_NODES,
        ])
        y = f(x)
        n = _GL_NODES.size
        whole = h * np.dot(_GL_WEIGHTS, y[:n])
        halves = 0.5 * h * (np.dot(_GL_WEIGHTS, y[n:2 * n]) + np.dot(_GL_WEIGHTS, y[2 * n:]))
        if not (np.isfinite(whole) and np.isfinite(halves)):
            raise QuadratureFailure(f"non-finite integrand on [{lo}, {hi}]")
        if abs(whole - halves) <= ptol:
            total += halves
        elif depth >= max_depth:
            raise QuadratureFailure(f"tolerance {tol} not met on [{lo}, {hi}]")
        else:
            stack.append((lo, mid, 0.5 * ptol, depth + 1))
            stack.append((mid, hi, 0.5 * ptol, depth + 1))
    return float(total)


@dataclass(frozen=True)
class RiemannPair:
    r1: float
    r2: float


@dataclass(frozen=True)
class QTransform:
    """The q-integral attached to one hyperbolic component of ``model``."""

    model: SigmaModel
    side: Side = Side.ALPHA
    quad_tol: float = QUAD_TOL

    @property
    def anchor(self) -> float:
        return self.model.alpha if self.side is Side.ALPHA else self.model.beta

    @property
    def orientation(self) -> int:
        """-1 when q grows leftwards from the anchor, +1 when it grows rightwards."""
        return -1 if self.side is Side.ALPHA else 1

    def _speed_w(self, w):
        # integrand after s = anchor -/+ w**2; smooth at w = 0
        s = self.anchor + self.orientation * w * w
        return 2.0 * w * np.sqrt(np.maximum(-np.asarray(self.model.dsigma(s), dtype=float), 0.0))

    def check_side(self, u: float) -> None:
        if self.orientation * (u - self.anchor) < 0:
            raise WrongSide(f"u={u} is not on the {self.side.value} of {self.anchor}")


def q_eval(qt: QTransform, u: float) -> float:
    qt.check_side(u)
    w = math.sqrt(abs(u - qt.anchor))
    return adaptive_gauss(qt._speed_w, 0.0, w, qt.quad_tol)


def q_prime(qt: QTransform, u: float) -> float:
    """Derivative of q: ``-sqrt(-sigma')`` on the alpha side, ``+sqrt(-sigma')`` on the beta side."""
    return qt.orientation * math.sqrt(max(-float(qt.model.dsigma(u)), 0.0))


def q_inverse(qt: QTransform, y: float, tol: float = TOL_INV,
              max_distance: float = 1e6) -> float:
    """Invert q on its component by safeguarded Newton inside a geometric bracket."""
    if y < 0:
        raise OutOfRange(f"q takes only nonnegative values, got {y}")
    if y == 0:
        return qt.anchor
    o, a = qt.orientation, qt.anchor
    dist = 1.0
    while q_eval(qt, a + o * dist) < y:
        dist *= 2.0
        if dist > max_distance:
            raise OutOfRange(f"y={y} exceeds q on a bracket of width {max_distance}")
    # g(d) = q(a + o d) - y is increasing in the distance d from the anchor
    lo, hi = 0.0, dist
    d = 0.5 * (lo + hi)
    for _ in range(200):
        g = q_eval(qt, a + o * d) - y
        if g > 0:
            hi = d
        else:
            lo = d
        slope = math.sqrt(max(-float(qt.model.dsigma(a + o * d)), 0.0))
        nd = d - g / slope if slope > 0 else -1.0
        if not (lo < nd < hi):
            nd = 0.5 * (lo + hi)
        if abs(nd - d) <= 1e-15 * max(1.0, d) or hi - lo <= 1e-15 * max(1.0, d):
            d = nd
            break
        d = nd
    u = a + o * d
    if abs(q_eval(qt, u) - y) > tol * max(1.0, y):
        raise OutOfRange(f"inversion of q at y={y} missed tolerance {tol}")
    return u


def to_riemann(qt: QTransform, u: float, v: float) -> RiemannPair:
    q = q_eval(qt, u)
    return RiemannPair(v - q, v + q)


def from_riemann(qt: QTransform, r: RiemannPair):
    gap = 0.5 * (r.r2 - r.r1)
    if gap < 0:
        if gap < -1e-14 * max(1.0, abs(r.r1), abs(r.r2)):
            raise OutOfRange(f"r2 < r1 ({r.r2} < {r.r1})")
        gap = 0.0
    return q_inverse(qt, gap), 0.5 * (r.r1 + r.r2)


def genuine_nonlinearity(model: SigmaModel, u: float, eps: float = EPS_PAR) -> float:
    """Derivative of a characteristic speed along its own invariant, sigma''/(4 sigma')."""
    d1 = float(model.dsigma(u))
    if -d1 <= eps:
        raise BoundaryDegeneracy(f"u={u} is not strictly hyperbolic (sigma'={d1})")
    return float(model.d2sigma(u)) / (4.0 * d1)
