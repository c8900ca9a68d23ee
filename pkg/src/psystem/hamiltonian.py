"""Particle mechanics in the potential u(t, x) for the quadratic law.

A solution ``(u, v)`` of the system with sigma = u**2/2 makes

    F(t, x, p) = p**3/3 + u p + v

a first integral of the flow ``x' = p, p' = -u_x`` of ``H = p**2/2 + u``.
This module integrates the flow, measures the drift of F, finds (m, n)
periodic orbits by discrete action minimisation and, from them, checks that
the linear part ``A t + B x`` of v satisfies ``A m + B n = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import NoConvergence, StepFailure
from .field import StateField

DT_FLOW = 1e-3
NODES_PER_UNIT = 512


class Potential:
    """Interface: ``u(t, x)`` and ``u_x(t, x)`` on arrays."""

    def u(self, t, x):
        raise NotImplementedError

    def u_x(self, t, x):
        raise NotImplementedError


@dataclass(frozen=True)
class AnalyticPotential(Potential):
    u_fn: Callable
    ux_fn: Callable

    def u(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        return np.broadcast_to(np.asarray(self.u_fn(t, x), float), t.shape)

    def u_x(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
        return np.broadcast_to(np.asarray(self.ux_fn(t, x), float), t.shape)


def constant_potential(c: float = 0.0) -> AnalyticPotential:
    return AnalyticPotential(lambda t, x: c + 0 * x, lambda t, x: 0 * x)


@dataclass(frozen=True)
class FieldPotential(Potential):
    """u taken from a stored field; ``period > 0`` repeats its time span."""

    field: StateField
    period: float = 0.0

    def _wrap(self, t):
        t = np.asarray(t, float)
        if self.period > 0:
            base = self.field.times[0]
            t = base + np.mod(t - base, self.period)
        return t

    def u(self, t, x):
        return self.field.sample(self._wrap(t), x)["u"]

    def u_x(self, t, x):
        return self.field.sample(self._wrap(t), x)["u_x"]


VField = Union[Callable, StateField, None]


def _v_sampler(v: VField, potential: Potential) -> Callable:
    if v is None:
        if isinstance(potential, FieldPotential):
            v = potential.field
        else:
            return lambda t, x: np.zeros(np.broadcast(np.asarray(t), np.asarray(x)).shape)
    if isinstance(v, StateField):
        fld = v
        return lambda t, x: fld.sample(t, x)["v"]
    return lambda t, x: np.broadcast_to(np.asarray(v(np.asarray(t, float), np.asarray(x, float)), float),
                                        np.broadcast(np.asarray(t), np.asarray(x)).shape)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray      # universal cover
    p: np.ndarray
    H: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    def table(self) -> np.ndarray:
        return np.column_stack([self.t, self.x, self.p, self.H, self.F])


def _integrals(potential: Potential, v: Callable, t, x, p):
    u = potential.u(t, x)
    return 0.5 * p * p + u, p ** 3 / 3.0 + u * p + v(t, x)


def _rk4_python(potential: Potential, t0, x0, p0, dt, n_steps):
    ts = np.empty(n_steps + 1)
    xs = np.empty(n_steps + 1)
    ps = np.empty(n_steps + 1)
    t, x, p = t0, x0, p0
    ts[0], xs[0], ps[0] = t, x, p
    g = lambda tt, xx: -float(potential.u_x(tt, xx))
    for i in range(1, n_steps + 1):
        a1 = g(t, x)
        a2 = g(t + 0.5 * dt, x + 0.5 * dt * p)
        a3 = g(t + 0.5 * dt, x + 0.5 * dt * (p + 0.5 * dt * a1))
        a4 = g(t + dt, x + dt * (p + 0.5 * dt * a2))
        x = x + dt / 6.0 * (p + 2 * (p + 0.5 * dt * a1) + 2 * (p + 0.5 * dt * a2) + (p + dt * a3))
        p = p + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        t = t0 + i * dt
        if not (math.isfinite(x) and math.isfinite(p)):
            raise StepFailure(f"non-finite state at t={t}")
        ts[i], xs[i], ps[i] = t, x, p
    return ts, xs, ps


def flow(potential: Potential, start, t_end: float, dt: float = DT_FLOW,
         v: VField = None, backend: Optional[str] = None) -> Trajectory:
    """RK4 integration of ``x' = p, p' = -u_x`` from ``start = (t0, x0, p0)``."""
    t0, x0, p0 = (float(a) for a in start)
    span = t_end - t0
    if span <= 0:
        raise ValueError("t_end must exceed the start time")
    n_steps = max(1, int(math.ceil(span / dt - 1e-9)))
    h = span / n_steps
    if isinstance(potential, FieldPotential):
        fld = potential.field
        mod = kernels.backend(backend)
        ts, xs, ps, ok = mod.flow(fld.times, fld.UX, fld.UXX, float(potential.period),
                                  t0, x0, p0, h, n_steps)
        if not ok:
            raise StepFailure("non-finite state in field flow")
        ts, xs, ps = np.asarray(ts), np.asarray(xs), np.asarray(ps)
    else:
        ts, xs, ps = _rk4_python(potential, t0, x0, p0, h, n_steps)
    H, F = _integrals(potential, _v_sampler(v, potential), ts, xs, ps)
    return Trajectory(ts, xs, ps, np.asarray(H, float), np.asarray(F, float))


def f_drift(potential: Potential, v: VField, traj: Trajectory) -> float:
    """``max |F(t) - F(t0)|`` along ``traj``."""
    _, F = _integrals(potential, _v_sampler(v, potential), traj.t, traj.x, traj.p)
    return float(np.max(np.abs(F - F[0])))


@dataclass
class MNOrbit:
    m: int
    n: int
    trajectory: Trajectory
    action: float
    iterations: int
    residual: float          # discrete Euler-Lagrange residual (max norm)
    p_legendre: np.ndarray   # second-order momentum at the loop nodes

    def seam_error(self) -> tuple:
        """``(|x(t0+m) - x(t0) - n|, |p(t0+m) - p(t0)|)``."""
        tr = self.trajectory
        return (abs(tr.x[-1] - tr.x[0] - self.n), abs(tr.p[-1] - tr.p[0]))


def find_mn_orbit(potential: Potential, m: int, n: int, x0: float = 0.0, t0: float = 0.0,
                  nodes_per_unit: int = NODES_PER_UNIT, tol: float = 1e-11,
                  max_iter: int = 20000, v: VField = None) -> MNOrbit:
    """Critical loop of the discrete action with ``x(t0 + m) = x(t0) + n``.

    Barzilai-Borwein descent in the discrete H1 metric (an FFT solve of
    ``(-D2/dt + dt) d = g``), starting from the straight line
    ``x0 + (n/m)(t - t0)``.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    N = int(m * nodes_per_unit)
    dt = m / N
    ts = t0 + dt * np.arange(N)
    base = x0 + (n / m) * (ts - t0)
    y = np.zeros(N)
    lap = 4.0 * np.sin(np.pi * np.fft.rfftfreq(N, 1.0 / N) / N) ** 2
    metric = lap / dt + dt

    def grad(y):
        x = base + y
        # periodic deviation: neighbours of a loop with shift n
        yp, ym = np.roll(y, -1), np.roll(y, 1)
        g = (2 * y - yp - ym) / dt - potential.u_x(ts, x) * dt
        return g

    def precond(g):
        return np.fft.irfft(np.fft.rfft(g) / metric, N)

    g = grad(y)
    d = precond(g)
    step = 1.0
    res = float(np.max(np.abs(g))) / dt
    it = 0
    while res > tol and it < max_iter:
        y_new = y - step * d
        g_new = grad(y_new)
        d_new = precond(g_new)
        s = y_new - y
        r = d_new - d
        sr = float(np.dot(s, r))
        step = float(np.dot(s, s)) / sr if sr > 0 else 1.0
        y, g, d = y_new, g_new, d_new
        res = float(np.max(np.abs(g))) / dt
        it += 1
        if not np.all(np.isfinite(y)):
            break
    if res > tol or not np.all(np.isfinite(y)):
        raise NoConvergence(f"({m},{n}) orbit: residual {res:.3e} after {it} iterations")
    x = base + y
    x_full = np.append(x, x[0] + n)
    t_full = np.append(ts, t0 + m)
    p = np.diff(x_full) / dt
    p_full = np.append(p, p[0])
    ux = potential.u_x(t_full, x_full)
    p_leg = p_full + 0.5 * dt * ux
    p_leg[-1] = p_leg[0]
    H, F = _integrals(potential, _v_sampler(v, potential), t_full, x_full, p_full)
    traj = Trajectory(t_full, x_full, p_full, np.asarray(H, float), np.asarray(F, float))
    action = float(np.sum(0.5 * p * p - potential.u(ts, x)) * dt)
    return MNOrbit(int(m), int(n), traj, action, it, res, p_leg)


def shoot(potential: Potential, t0: float, x0: float, x1: float, span: float,
          p_guess: float, dt: float = DT_FLOW, tol: float = 1e-12, max_iter: int = 50):
    """Momentum ``p0`` with ``x(t0 + span) = x1`` by secant iteration on the flow."""
    def miss(p):
        return flow(potential, (t0, x0, p), t0 + span, dt).x[-1] - x1

    pa, pb = p_guess, p_guess + 1e-3
    fa, fb = miss(pa), miss(pb)
    for _ in range(max_iter):
        if abs(fb) <= tol:
            break
        if fb == fa:
            break
        pa, pb, fa = pb, pb - fb * (pb - pa) / (fb - fa), fb
        fb = miss(pb)
    if abs(fb) > max(tol, 1e-9):
        raise NoConvergence(f"shooting failed, miss {fb:.3e}")
    return pb, flow(potential, (t0, x0, pb), t0 + span, dt)


@dataclass
class VDecomposition:
    A: float
    B: float
    c: float
    rms_residual: float
    sampler: Callable = field(repr=False)

    def v_tilde(self, t, x):
        return self.sampler(t, x) - self.A * np.asarray(t) - self.B * np.asarray(x) - self.c


def decompose_v(v: Callable, t_range: tuple, n_t: int = 33, n_x: int = 64,
                n_modes: int = 4) -> VDecomposition:
    """Least-squares fit ``v = A t + B x + c + v_tilde`` on ``t_range x [0, 1)``.

    ``v_tilde`` is represented by doubly periodic Fourier modes (period 1 in x,
    the length of ``t_range`` in t) up to ``n_modes`` in each direction, so
    the periodic part is not aliased into A and B.
    """
    tt = np.linspace(t_range[0], t_range[1], n_t)
    xx = np.arange(n_x) / n_x
    T, X = np.meshgrid(tt, xx, indexing="ij")
    T, X = T.ravel(), X.ravel()
    vals = np.asarray(v(T, X), float).ravel()
    period = t_range[1] - t_range[0]
    cols = [T, X, np.ones(T.size)]
    ax = 2 * np.pi * X
    at = 2 * np.pi * (T - t_range[0]) / period
    for j in range(n_modes + 1):
        for k in range(-n_modes, n_modes + 1):
            if j == 0 and k <= 0:
                continue
            phase = j * ax + k * at
            cols.extend([np.cos(phase), np.sin(phase)])
    M = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(M, vals, rcond=None)
    res = vals - M[:, :3] @ coef[:3]
    periodic = M[:, 3:] @ coef[3:]
    return VDecomposition(float(coef[0]), float(coef[1]), float(coef[2]),
                          float(np.sqrt(np.mean((res - periodic) ** 2))), v)


@dataclass
class ReductionResult:
    A: float
    B: float
    max_mismatch: float
    per_orbit: list
    decomposition: VDecomposition

    def to_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "max_mismatch": self.max_mismatch,
                "per_orbit": self.per_orbit}


def reduction_check(potential: Potential, v: VField, orbits: Sequence[MNOrbit],
                    t_range: Optional[tuple] = None) -> ReductionResult:
    """Fit ``v = A t + B x + periodic`` and evaluate ``A m + B n`` for each orbit.

    Each orbit also reports the change of F across its seam, which equals
    ``A m + B n`` when F is conserved and u is doubly periodic.
    """
    vs = _v_sampler(v, potential)
    if t_range is None:
        if isinstance(v, StateField):
            t_range = (float(v.times[0]), float(v.times[-1]))
        elif isinstance(potential, FieldPotential) and v is None:
            t_range = (float(potential.field.times[0]), float(potential.field.times[-1]))
        else:
            t_range = (0.0, 1.0)
    if t_range[1] <= t_range[0]:
        t_range = (t_range[0], t_range[0] + 1.0)
    dec = decompose_v(vs, t_range)
    rows = []
    for orb in orbits:
        tr = orb.trajectory
        mismatch = dec.A * orb.m + dec.B * orb.n
        seam = float(vs(tr.t[-1], tr.x[-1]) - vs(tr.t[0], tr.x[0]))
        rows.append({"m": orb.m, "n": orb.n, "mismatch": float(mismatch), "seam_dv": seam})
    worst = max((abs(r["mismatch"]) for r in rows), default=0.0)
    return ReductionResult(dec.A, dec.B, worst, rows, dec)
