"""Weighted energy ``E(t) = int f(u) dx`` on the elliptic band and its concavity.

For ``alpha <= u <= beta`` and a weight with ``f(alpha) = f(beta) = 0``,
``f > 0`` inside and ``f'' < 0``, solutions satisfy

    E'' = int f''(u) (v_x**2 + sigma'(u) u_x**2) dx  <= 0.

The monitor compares this integral with a finite-difference second
derivative of E over stored frames; a mismatch flags data that does not
solve the system.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .constitutive import SigmaModel
from .errors import DegenerateInterval, OutsideEllipticBand
from .field import StateField

TOL_CONC = 1e-10
BAND_TOL = 1e-9


@dataclass(frozen=True)
class WeightFunction:
    f: Callable
    df: Callable
    d2f: Callable
    alpha: float
    beta: float

    def validate(self, n_samples: int = 10_000) -> list:
        problems = []
        u = np.linspace(self.alpha, self.beta, n_samples)
        if abs(self.f(self.alpha)) > 1e-12 or abs(self.f(self.beta)) > 1e-12:
            problems.append("f must vanish at both band edges")
        if np.any(np.asarray(self.f(u[1:-1])) <= 0):
            problems.append("f must be positive inside the band")
        if np.any(np.broadcast_to(self.d2f(u), u.shape) >= 0):
            problems.append("f'' must be negative on the band")
        return problems


def default_weight(model: SigmaModel) -> WeightFunction:
    """``f(u) = (u - alpha)(beta - u)``, so ``f'' = -2``."""
    a, b = model.alpha, model.beta
    if not b > a:
        raise DegenerateInterval(f"elliptic band [{a}, {b}] is empty")
    return WeightFunction(
        f=lambda u: (np.asarray(u) - a) * (b - np.asarray(u)),
        df=lambda u: a + b - 2.0 * np.asarray(u),
        d2f=lambda u: np.full(np.shape(u), -2.0) if np.ndim(u) else -2.0,
        alpha=a, beta=b)


def _check_band(model: SigmaModel, w: WeightFunction, u: np.ndarray, tol: float):
    bad = np.flatnonzero((u < w.alpha - tol) | (u > w.beta + tol))
    if bad.size:
        raise OutsideEllipticBand(
            f"{bad.size} grid points outside [{w.alpha}, {w.beta}]",
            [(int(j), float(u[j])) for j in bad[:20]])


def energy(field: StateField, i: int, w: Optional[WeightFunction] = None,
           band_tol: float = BAND_TOL) -> float:
    w = w or default_weight(field.model)
    u = field.frames[i].u
    _check_band(field.model, w, u, band_tol)
    return float(np.mean(w.f(u)))


def energy_ddot(field: StateField, i: int, w: Optional[WeightFunction] = None,
                band_tol: float = BAND_TOL) -> float:
    """The second-derivative identity evaluated on frame ``i`` (v_x includes winding)."""
    w = w or default_weight(field.model)
    u = field.frames[i].u
    _check_band(field.model, w, u, band_tol)
    ux = field.UX[i]
    vx = field.VX[i] + field.winding_C
    integrand = np.broadcast_to(w.d2f(u), u.shape) * (vx * vx + field.model.dsigma(u) * ux * ux)
    return float(np.mean(integrand))


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"


@dataclass
class EnergyTrace:
    times: np.ndarray
    E: np.ndarray
    E_ddot_integral: np.ndarray
    E_ddot_fd: np.ndarray          # NaN at the two end frames
    verdict: Verdict
    reasons: list

    def table(self) -> np.ndarray:
        return np.column_stack([self.times, self.E, self.E_ddot_integral, self.E_ddot_fd])


def second_difference(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Three-point second derivative on a possibly non-uniform grid (NaN at ends)."""
    out = np.full(y.shape, np.nan)
    if y.size < 3:
        return out
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    out[1:-1] = 2.0 * (h1 * y[2:] - (h1 + h2) * y[1:-1] + h2 * y[:-2]) / (h1 * h2 * (h1 + h2))
    return out


def cross_tolerance(fd: float) -> float:
    return max(1e-4, 1e-2 * abs(fd))


def concavity_monitor(field: StateField, w: Optional[WeightFunction] = None,
                      tol_conc: float = TOL_CONC, band_tol: float = BAND_TOL) -> EnergyTrace:
    w = w or default_weight(field.model)
    n = len(field.frames)
    E = np.array([energy(field, i, w, band_tol) for i in range(n)])
    Edd = np.array([energy_ddot(field, i, w, band_tol) for i in range(n)])
    fd = second_difference(field.times, E)
    reasons = []
    over = np.flatnonzero(Edd > tol_conc)
    if over.size:
        reasons.append(f"identity value above {tol_conc:g} at {over.size} frames "
                       f"(max {Edd[over].max():.3e})")
    inner = np.isfinite(fd)
    gap = np.abs(Edd[inner] - fd[inner])
    allowed = np.array([cross_tolerance(a) for a in fd[inner]])
    bad = np.flatnonzero(gap > allowed)
    if bad.size:
        reasons.append(f"identity and finite difference disagree at {bad.size} frames "
                       f"(max gap {gap.max():.3e})")
    return EnergyTrace(field.times.copy(), E, Edd, fd,
                       Verdict.FAIL if reasons else Verdict.PASS, reasons)
