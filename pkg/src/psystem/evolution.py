"""Method-of-lines evolution of the p-system on the periodic circle.

    u_t = -v_x,   v_t = (sigma(u))_x,   v(t, x + 1) = v(t, x) + C.

Spatial derivatives use Fourier collocation and time stepping is classical
RK4.  The solver carries the winding constant ``C`` analytically and evolves
only the periodic part of ``v``.  It aims at maximal accuracy up to gradient
blow-up and reports that event instead of continuing past it.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import spectral
from .constitutive import EPS_PAR, SigmaModel, classify_codes
from .errors import InitialNotHyperbolic, InsufficientFrames, StepRejected
from .field import StateField

log = logging.getLogger(__name__)


class StopPolicy(str, enum.Enum):
    CONTINUE = "continue"
    STOP_ON_MIXED = "stop-on-mixed"
    STOP_ON_ELLIPTIC = "stop-on-elliptic"


class StopReason(str, enum.Enum):
    TIME_LIMIT = "TimeLimit"
    BLOW_UP = "BlowUpSuspected"
    ELLIPTIC_ONSET = "EllipticOnset"
    MAX_STEPS = "MaxSteps"


@dataclass(frozen=True)
class SolverSettings:
    cfl: float = 0.4
    lambda_floor: float = 0.1
    dt: Optional[float] = None  # fixed step; overrides the CFL rule
    filter: bool = False
    filter_order: int = 16
    grad_max: float = 1e3
    tail_max: float = 1e-4
    eps_par: float = EPS_PAR


@dataclass
class RunReport:
    stop_reason: StopReason
    t_start: float
    t_end: float
    n_steps: int
    t_prime: Optional[float] = None
    blowup_time: Optional[float] = None
    blowup_cause: Optional[str] = None
    grad_history: list = field(default_factory=list)
    tail_history: list = field(default_factory=list)
    advisory: bool = False

    def to_dict(self) -> dict:
        return {
            "stop_reason": self.stop_reason.value,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "n_steps": self.n_steps,
            "t_prime": self.t_prime,
            "blowup_time": self.blowup_time,
            "blowup_cause": self.blowup_cause,
            "advisory": self.advisory,
            "max_grad_final": self.grad_history[-1][1] if self.grad_history else None,
        }


def rhs(model: SigmaModel, u: np.ndarray, v: np.ndarray, winding_C: float = 0.0):
    """Time derivatives ``(u_t, v_t)`` of the periodic state."""
    n = u.size
    k = spectral.wavenumbers(n)
    vx = np.fft.irfft(1j * k * np.fft.rfft(v), n) + winding_C
    sx = np.fft.irfft(1j * k * np.fft.rfft(model.sigma(u)), n)
    return -vx, sx


def rk4_step(model, u, v, dt, winding_C=0.0):
    a_u, a_v = rhs(model, u, v, winding_C)
    b_u, b_v = rhs(model, u + 0.5 * dt * a_u, v + 0.5 * dt * a_v, winding_C)
    c_u, c_v = rhs(model, u + 0.5 * dt * b_u, v + 0.5 * dt * b_v, winding_C)
    d_u, d_v = rhs(model, u + dt * c_u, v + dt * c_v, winding_C)
    return (u + dt / 6.0 * (a_u + 2 * b_u + 2 * c_u + d_u),
            v + dt / 6.0 * (a_v + 2 * b_v + 2 * c_v + d_v))


def stable_dt(model: SigmaModel, u: np.ndarray, settings: SolverSettings) -> float:
    """CFL step from the largest characteristic speed (|sigma'|**0.5 in elliptic zones)."""
    if settings.dt is not None:
        return settings.dt
    speed = float(np.sqrt(np.max(np.abs(model.dsigma(u)))))
    codes = classify_codes(model, u, settings.eps_par)
    pure = codes.min() == codes.max() and codes[0] in (0, 1)
    if not pure:
        speed = max(speed, settings.lambda_floor)
    speed = max(speed, 1e-12)
    return settings.cfl * (1.0 / u.size) / speed


def smoothness(u: np.ndarray, v: np.ndarray):
    """``(max|u_x|, spectral tail fraction)`` of a periodic state."""
    grad = float(np.max(np.abs(spectral.derivative(u))))
    tail = max(spectral.tail_fraction(u), spectral.tail_fraction(v))
    return grad, tail


def _check_limits(u, v, settings, t_last):
    grad, tail = smoothness(u, v)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise StepRejected("non-finite state", "nonfinite", t_last)
    if grad > settings.grad_max:
        raise StepRejected(f"max|u_x|={grad:.3g} exceeds {settings.grad_max}", "gradient", t_last)
    if tail > settings.tail_max:
        raise StepRejected(f"spectral tail {tail:.3g} exceeds {settings.tail_max}", "tail", t_last)
    return grad, tail


def _advance(model, u, v, dt, winding_C, settings, weights):
    un, vn = rk4_step(model, u, v, dt, winding_C)
    if weights is not None:
        un = spectral.apply_filter(un, weights)
        vn = spectral.apply_filter(vn, weights)
    return un, vn


def step(field: StateField, dt: float, settings: SolverSettings = SolverSettings()) -> StateField:
    """Append one RK4 frame advanced by ``dt``; raises :class:`StepRejected` on limit breach."""
    last = field.frames[-1]
    _, tail = smoothness(last.u, last.v)
    if tail > settings.tail_max:
        raise StepRejected(f"latest frame not smooth (tail {tail:.3g})", "tail", last.t)
    weights = spectral.exp_filter(field.n_x, settings.filter_order) if settings.filter else None
    un, vn = _advance(field.model, last.u, last.v, dt, field.winding_C, settings, weights)
    _check_limits(un, vn, settings, last.t)
    return field.append(last.t + dt, un, vn)


def _hyperbolic_margin(model, u):
    return float(np.min(-np.asarray(model.dsigma(u), dtype=float)))


def run(model: SigmaModel, u0: np.ndarray, v0: np.ndarray, t_max: float,
        settings: SolverSettings = SolverSettings(), winding_C: float = 0.0,
        stop_policy: StopPolicy = StopPolicy.STOP_ON_MIXED, t0: float = 0.0,
        save_every: int = 1, max_steps: int = 2_000_000):
    """Evolve from ``(u0, v0)`` until ``t_max``, blow-up or non-hyperbolic onset.

    Returns ``(StateField, RunReport)``.  A rejected step never raises; it ends
    the run with ``BlowUpSuspected`` at the last accepted time.
    """
    stop_policy = StopPolicy(stop_policy)
    u = np.array(u0, dtype=float)
    v = np.array(v0, dtype=float)
    n = u.size
    times, us, vs = [t0], [u.copy()], [v.copy()]
    weights = spectral.exp_filter(n, settings.filter_order) if settings.filter else None
    codes0 = classify_codes(model, u, settings.eps_par)
    initial_tag = int(codes0[0]) if (codes0.min() == codes0.max() and codes0[0] in (0, 1)) else None
    report = RunReport(StopReason.TIME_LIMIT, t0, t0, 0)
    grad, tail = smoothness(u, v)
    report.grad_history.append((t0, grad))
    report.tail_history.append((t0, tail))
    if initial_tag is None:
        report.t_prime = t0
        report.advisory = bool(np.any(codes0 == 2))
        if stop_policy is StopPolicy.STOP_ON_MIXED or (
                stop_policy is StopPolicy.STOP_ON_ELLIPTIC and np.any(codes0 == 2)):
            report.stop_reason = StopReason.ELLIPTIC_ONSET
            return StateField.from_arrays(model, times, us, vs, winding_C), report

    t = t0
    margin_prev = _hyperbolic_margin(model, u)
    steps = 0
    while True:
        if t_max - t <= 1e-12 * max(1.0, abs(t_max)):
            report.stop_reason = StopReason.TIME_LIMIT
            break
        if steps >= max_steps:
            report.stop_reason = StopReason.MAX_STEPS
            break
        dt = min(stable_dt(model, u, settings), t_max - t)
        try:
            un, vn = _advance(model, u, v, dt, winding_C, settings, weights)
            grad, tail = _check_limits(un, vn, settings, t)
        except StepRejected as exc:
            report.stop_reason = StopReason.BLOW_UP
            report.blowup_time = t
            report.blowup_cause = exc.reason
            log.info("step rejected at t=%.6g: %s", t, exc)
            break
        u, v = un, vn
        t += dt
        steps += 1
        report.grad_history.append((t, grad))
        report.tail_history.append((t, tail))
        if steps % save_every == 0:
            times.append(t); us.append(u.copy()); vs.append(v.copy())
        codes = classify_codes(model, u, settings.eps_par)
        if np.any(codes == 2):
            report.advisory = True
        if initial_tag is not None and report.t_prime is None and np.any(codes != initial_tag):
            margin = _hyperbolic_margin(model, u)
            frac = (margin_prev - settings.eps_par) / (margin_prev - margin) if margin_prev != margin else 1.0
            report.t_prime = t - dt + min(max(frac, 0.0), 1.0) * dt
            if stop_policy is StopPolicy.STOP_ON_MIXED:
                report.stop_reason = StopReason.ELLIPTIC_ONSET
                break
        if stop_policy is StopPolicy.STOP_ON_ELLIPTIC and np.any(codes == 2):
            if report.t_prime is None:
                report.t_prime = t
            report.stop_reason = StopReason.ELLIPTIC_ONSET
            break
        margin_prev = _hyperbolic_margin(model, u)
    if times[-1] != t:
        times.append(t); us.append(u.copy()); vs.append(v.copy())
    report.t_end = t
    report.n_steps = steps
    fld = StateField.from_arrays(model, times, us, vs, winding_C,
                                 meta={"advisory": report.advisory})
    return fld, report


def residual(field: StateField, i: int):
    """Max-norm residuals ``(|u_t + v_x|, |v_t - sigma(u)_x|)`` at frame ``i``.

    Space derivatives are spectral, the time derivative is the three-point
    centered difference on the (possibly non-uniform) frame times.
    """
    if i <= 0 or i >= len(field.frames) - 1:
        raise InsufficientFrames(f"frame {i} needs a predecessor and a successor")
    fm, f0, fp = field.frames[i - 1], field.frames[i], field.frames[i + 1]
    h1, h2 = f0.t - fm.t, fp.t - f0.t
    cm = -h2 / (h1 * (h1 + h2))
    c0 = (h2 - h1) / (h1 * h2)
    cp = h1 / (h2 * (h1 + h2))
    u_t = cm * fm.u + c0 * f0.u + cp * fp.u
    v_t = cm * fm.v + c0 * f0.v + cp * fp.v
    vx = spectral.derivative(f0.v) + field.winding_C
    sx = spectral.derivative(field.model.sigma(f0.u))
    return float(np.max(np.abs(u_t + vx))), float(np.max(np.abs(v_t - sx)))


@dataclass
class RegionMask:
    codes: np.ndarray       # PointClass codes per grid point
    labels: np.ndarray      # connected-run label per grid point
    crossings: np.ndarray   # True on edge j -> j+1 where unequal non-boundary tags touch

    @property
    def n_components(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


def region_mask(model: SigmaModel, u: np.ndarray, eps: float = EPS_PAR) -> RegionMask:
    codes = classify_codes(model, u, eps)
    n = codes.size
    nxt = np.roll(codes, -1)
    crossings = (codes != nxt) & (codes != 3) & (nxt != 3)
    change = np.zeros(n, dtype=bool)
    change[1:] = codes[1:] != codes[:-1]
    labels = np.cumsum(change)
    if n and codes[0] == codes[-1] and labels[-1] != 0:
        # the run touching x = 1 continues the run starting at x = 0
        labels[labels == labels[-1]] = 0
        _, labels = np.unique(labels, return_inverse=True)
    return RegionMask(codes, labels.astype(int), crossings)


def first_nonhyperbolic(field: StateField, eps: float = EPS_PAR) -> Optional[float]:
    """Earliest time at which the field leaves its initial hyperbolic component.

    The crossing is located by linear interpolation of ``min(-sigma')``
    between the last fully hyperbolic frame and the first offending one.
    """
    model = field.model
    codes0 = classify_codes(model, field.frames[0].u, eps)
    if not (codes0.min() == codes0.max() and codes0[0] in (0, 1)):
        raise InitialNotHyperbolic("initial frame is not inside one hyperbolic component")
    tag = codes0[0]
    prev = field.frames[0]
    for f in field.frames[1:]:
        if np.any(classify_codes(model, f.u, eps) != tag):
            m0 = _hyperbolic_margin(model, prev.u)
            m1 = _hyperbolic_margin(model, f.u)
            frac = (m0 - eps) / (m0 - m1) if m0 != m1 else 1.0
            return prev.t + min(max(frac, 0.0), 1.0) * (f.t - prev.t)
        prev = f
    return None


def invariant_gradients(model: SigmaModel, u, u_x, v_x, eps: float = EPS_PAR):
    """``((r1)_x, (r2)_x)`` from field derivatives (``v_x`` includes the winding)."""
    c = np.sqrt(np.maximum(-np.asarray(model.dsigma(u), dtype=float), 0.0))
    alpha_side = np.asarray(u) < model.alpha
    r1x = np.where(alpha_side, v_x + c * u_x, v_x - c * u_x)
    r2x = np.where(alpha_side, v_x - c * u_x, v_x + c * u_x)
    return r1x, r2x


def monotone_invariant_check(field: StateField, i: int, eps: float = EPS_PAR) -> list:
    """Per hyperbolic interval of frame ``i``: extent and min/max of ``(r1)_x``, ``(r2)_x``."""
    f = field.frames[i]
    mask = region_mask(field.model, f.u, eps)
    ux = field.UX[i]
    vx = field.VX[i] + field.winding_C
    r1x, r2x = invariant_gradients(field.model, f.u, ux, vx, eps)
    out = []
    for lab in range(mask.n_components):
        idx = np.flatnonzero(mask.labels == lab)
        code = int(mask.codes[idx[0]])
        if code not in (0, 1):
            continue
        out.append({
            "side": "AlphaSide" if code == 0 else "BetaSide",
            "indices": (int(idx[0]), int(idx[-1])),
            "n_points": int(idx.size),
            "r1x_min": float(r1x[idx].min()), "r1x_max": float(r1x[idx].max()),
            "r2x_min": float(r2x[idx].min()), "r2x_max": float(r2x[idx].max()),
        })
    return out
