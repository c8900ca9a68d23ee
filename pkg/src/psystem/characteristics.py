"""Characteristics, Riccati data and gradient blow-up prediction.

Along a characteristic ``x' = lambda(u)`` of either family the weighted
gradient ``z = r_x (-sigma'(u))**(1/4)`` of the transported invariant obeys

    z' + k z**2 = 0,      k = -sigma''(u) / (4 (-sigma'(u))**(5/4)),

whose exact solution is ``z0 / (1 + z0 * int k)``.  The tracer integrates the
path together with ``K = int k`` and a direct RK4 solution ``Z`` of the
Riccati equation, so the closed form can be checked against it.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .constitutive import EPS_PAR, SigmaModel
from .errors import BoundaryDegeneracy, StartNotHyperbolic
from .field import StateField
from .riemann import Family, QTransform, Side, q_eval

EPS_DEN = 1e-8
DT_MIN = 1e-8
GROWTH_THRESHOLD = 10.0


class Direction(str, enum.Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"

    @property
    def sign(self) -> int:
        return 1 if self is Direction.FORWARD else -1


class Termination(str, enum.Enum):
    FIELD_EDGE = "FieldEdge"
    BOUNDARY_HIT = "BoundaryHit"
    BLOW_UP = "BlowUp"
    STEP_FAILURE = "StepFailure"


_STATUS = {
    kernels.FIELD_EDGE: Termination.FIELD_EDGE,
    kernels.BOUNDARY_HIT: Termination.BOUNDARY_HIT,
    kernels.BLOW_UP: Termination.BLOW_UP,
    kernels.STEP_FAILURE: Termination.STEP_FAILURE,
}


class CharClass(str, enum.Enum):
    A_PLUS = "A_plus"
    A_MINUS = "A_minus"
    B_PLUS = "B_plus"
    B_MINUS = "B_minus"
    UNDETERMINED = "Undetermined"

    @property
    def letter(self) -> str:
        return self.value[0] if self is not CharClass.UNDETERMINED else "?"


class _BlowUp:
    """Sentinel returned by :func:`riccati_exact` when the denominator vanishes."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BLOW_UP"


BLOW_UP = _BlowUp()


@dataclass
class RiccatiRecord:
    z0: float
    t0: float
    k_integral: np.ndarray            # columns (t, int_{t0}^t k ds)
    z_integrated: np.ndarray          # direct RK4 solution of z' = -k z^2
    predicted_blowup: Optional[float] = None

    def exact(self) -> np.ndarray:
        """Closed-form ``z0 / (1 + z0 K)`` at the recorded times (inf past blow-up)."""
        den = 1.0 + self.z0 * self.k_integral[:, 1]
        with np.errstate(divide="ignore"):
            return np.where(np.abs(den) > EPS_DEN, self.z0 / den, np.inf)

    def denominator(self) -> np.ndarray:
        return 1.0 + self.z0 * self.k_integral[:, 1]


@dataclass
class CharacteristicPath:
    family: Family
    direction: Direction
    side: Side
    t: np.ndarray
    x: np.ndarray          # universal-cover coordinate
    u: np.ndarray
    lam: np.ndarray
    z: np.ndarray          # sampled from the field
    k: np.ndarray
    r_x: np.ndarray        # x-derivative of the invariant carried by this family
    termination: Termination
    t_end: float
    riccati: RiccatiRecord
    dt: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def x_end(self) -> float:
        return float(self.x[-1])

    @property
    def winding(self) -> np.ndarray:
        return np.floor(self.x).astype(int)

    def samples(self) -> np.ndarray:
        """Rows ``(t, x, u, lambda, z, k)``."""
        return np.column_stack([self.t, self.x, self.u, self.lam, self.z, self.k])

    def table(self) -> np.ndarray:
        """CSV rows ``(t, x_unwrapped, u, lambda, z, k, k_integral)``."""
        return np.column_stack([self.t, self.x, self.u, self.lam, self.z, self.k,
                                self.riccati.k_integral[:, 1]])


def riccati_coefficient(model: SigmaModel, u: float, eps: float = EPS_PAR) -> float:
    m = -float(model.dsigma(u))
    if m <= eps:
        raise BoundaryDegeneracy(f"k is singular at u={u} (sigma'={-m})")
    return -float(model.d2sigma(u)) / (4.0 * m ** 1.25)


def riccati_exact(z0: float, k_int: float, eps_den: float = EPS_DEN):
    """``z0 / (1 + z0 * k_int)``, or :data:`BLOW_UP` when the denominator vanishes."""
    den = 1.0 + z0 * k_int
    if abs(den) <= eps_den:
        return BLOW_UP
    return z0 / den


def z_variable(qt: QTransform, r_x: float, u: float, eps: float = EPS_PAR) -> float:
    m = -float(qt.model.dsigma(u))
    if m <= eps:
        raise BoundaryDegeneracy(f"z is undefined at u={u}")
    return r_x * m ** 0.25


def _paired_invariant(model: SigmaModel, side: Side, family: Family, u: float, v: float) -> float:
    """Invariant carried by ``family``: ``v + family.sign * F(u)`` with ``F' = sqrt(-sigma')``."""
    q = q_eval(QTransform(model, side), u)
    F = -q if side is Side.ALPHA else q
    return v + family.sign * F


def seed_z0(field: StateField, t: float, x: float, family: Family, side: Side,
            eps: float = EPS_PAR) -> float:
    """Initial Riccati variable from centered differences of the invariant in x."""
    h = 1.0 / field.n_x
    s = field.sample([t, t, t], [x - h, x, x + h])
    rm = _paired_invariant(field.model, side, family, s["u"][0], s["v"][0])
    rp = _paired_invariant(field.model, side, family, s["u"][2], s["v"][2])
    m = -float(field.model.dsigma(s["u"][1]))
    if m <= eps:
        raise BoundaryDegeneracy("seed sits in the boundary band")
    return (rp - rm) / (2.0 * h) * m ** 0.25


def path_step(field: StateField, eps: float = EPS_PAR) -> float:
    """Default tracer step: min(frame spacing, 0.25 dx / max|lambda|)."""
    lam = np.sqrt(np.maximum(-np.asarray(field.model.dsigma(field.U), dtype=float), 0.0))
    lam_max = max(float(lam.max()), 1e-12)
    dt = 0.25 / field.n_x / lam_max
    if len(field.frames) > 1:
        dt = min(dt, float(np.min(np.diff(field.times))))
    return dt


def _kernel_for(model: SigmaModel, backend: Optional[str]):
    if backend is None:
        mod = kernels.backend() if model.poly is not None else kernels.backend("python")
    else:
        mod = kernels.backend(backend)
    if mod.BACKEND == "cython":
        return mod, model.dpoly, model.d2poly
    if model.poly is not None:
        return mod, model.dpoly, model.d2poly
    return mod, model.dsigma, model.d2sigma


def trace(field: StateField, start, family: Family = Family.FIRST,
          direction: Direction = Direction.FORWARD, *, dt: Optional[float] = None,
          z0: Optional[float] = None, t_stop: Optional[float] = None,
          eps_par: float = EPS_PAR, dt_min: float = DT_MIN, eps_den: float = EPS_DEN,
          max_steps: int = 2_000_000, backend: Optional[str] = None) -> CharacteristicPath:
    """Trace the ``family`` characteristic through ``start = (t, x)``.

    Integration stops at the boundary band, the edge of the stored time span,
    Riccati blow-up (``1 + z0 K`` reaching ``eps_den``) or a step failure.
    """
    family, direction = Family(family), Direction(direction)
    model = field.model
    t0, x0 = float(start[0]), float(start[1])
    s0 = field.sample(t0, x0)
    u0 = float(s0["u"])
    if -float(model.dsigma(u0)) <= eps_par:
        raise StartNotHyperbolic(f"u={u0:.6g} at (t={t0}, x={x0}) is not strictly hyperbolic")
    side = Side.ALPHA if u0 < model.alpha else Side.BETA
    if z0 is None:
        z0 = seed_z0(field, t0, x0, family, side, eps_par)
    if dt is None:
        dt = path_step(field, eps_par)
    if t_stop is None:
        t_stop = field.times[-1] if direction is Direction.FORWARD else field.times[0]
    anchor = model.alpha if side is Side.ALPHA else model.beta
    orient = -1.0 if side is Side.ALPHA else 1.0
    mod, d1, d2 = _kernel_for(model, backend)
    ts, xs, us, Ks, Zs, status, t_event = mod.trace(
        field.times, field.U, field.UX, d1, d2, anchor, orient, float(family.sign),
        t0, x0, float(z0), direction.sign * abs(dt), float(t_stop), eps_par, dt_min,
        eps_den, max_steps)
    ts, xs, us = np.asarray(ts, float), np.asarray(xs, float), np.asarray(us, float)
    Ks, Zs = np.asarray(Ks, float), np.asarray(Zs, float)
    termination = _STATUS[int(status)]

    m = np.maximum(-np.asarray(model.dsigma(us), dtype=float), 0.0)
    lam = family.sign * np.sqrt(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = -np.asarray(model.d2sigma(us), dtype=float) / (4.0 * m ** 1.25)
    smp = field.sample(ts, xs)
    r_x = smp["v_x"] + lam * smp["u_x"]
    z = r_x * m ** 0.25
    rec = RiccatiRecord(float(z0), t0, np.column_stack([ts, Ks]), Zs,
                        float(t_event) if termination is Termination.BLOW_UP else None)
    return CharacteristicPath(family, direction, side, ts, xs, us, lam, z, k, r_x,
                              termination, float(t_event if termination is not Termination.FIELD_EDGE else ts[-1]),
                              rec, dt=float(dt))


def predict_blowup(field: StateField, start, family: Family = Family.FIRST,
                   extrapolate: float = 0.0, **trace_kw) -> Optional[float]:
    """First time at which ``1 + z0 * int k`` vanishes along the forward characteristic.

    With ``extrapolate > 0`` a denominator still positive but decreasing at
    the field's last frame is continued linearly, accepting zeros no further
    than ``extrapolate * (t_end - t0)`` beyond the edge.
    """
    path = trace(field, start, family, Direction.FORWARD, **trace_kw)
    return _blowup_from_path(path, extrapolate)


def _blowup_from_path(path: CharacteristicPath, extrapolate: float) -> Optional[float]:
    rec = path.riccati
    if path.termination is Termination.BLOW_UP:
        return rec.predicted_blowup
    if extrapolate <= 0 or path.termination is not Termination.FIELD_EDGE or rec.z0 == 0:
        return None
    d_end = 1.0 + rec.z0 * rec.k_integral[-1, 1]
    slope = rec.z0 * path.k[-1]
    if slope >= 0 or d_end <= 0:
        return None
    t_star = path.t[-1] + d_end / (-slope)
    span = path.t[-1] - rec.t0
    return float(t_star) if t_star - path.t[-1] <= extrapolate * span else None


def earliest_blowup(field: StateField, seeds: Optional[Sequence[float]] = None,
                    families: Sequence[Family] = (Family.FIRST, Family.SECOND),
                    t0: Optional[float] = None, extrapolate: float = 0.0, **trace_kw):
    """Minimum predicted blow-up time over seeds at ``t0`` (default: first frame).

    Returns ``(t_star or None, list of per-seed dicts)``.
    """
    if t0 is None:
        t0 = float(field.times[0])
    if seeds is None:
        seeds = field.x
    best, rows = None, []
    for fam in families:
        for x0 in seeds:
            try:
                path = trace(field, (t0, x0), fam, Direction.FORWARD, **trace_kw)
            except (StartNotHyperbolic, BoundaryDegeneracy):
                continue
            ts = _blowup_from_path(path, extrapolate)
            rows.append({"family": Family(fam).value, "x0": float(x0), "z0": path.riccati.z0,
                         "termination": path.termination.value, "t_star": ts})
            if ts is not None and (best is None or ts < best):
                best = ts
    return best, rows


def classify_path(path: CharacteristicPath, horizon: float,
                  growth_threshold: float = GROWTH_THRESHOLD, window: float = 0.5,
                  horizon_tol: float = 1e-9) -> CharClass:
    """Numerical verdict on the A/B class of a traced characteristic.

    B needs the path to reach ``horizon`` with ``-u`` (distance from the
    anchor, on the beta side) growing by at least ``growth_threshold`` over
    the final ``window`` fraction of the path.  Growth that is monotone but
    below the threshold, or a path stopped early for other reasons, is
    Undetermined.
    """
    fwd = path.direction is Direction.FORWARD
    plus_minus = (CharClass.A_PLUS, CharClass.B_PLUS) if fwd else (CharClass.A_MINUS, CharClass.B_MINUS)
    if path.termination is Termination.BOUNDARY_HIT:
        return plus_minus[0]
    if path.termination is not Termination.FIELD_EDGE:
        return CharClass.UNDETERMINED
    reached = abs(path.t[-1] - horizon) <= horizon_tol * max(1.0, abs(horizon))
    if not reached:
        return CharClass.UNDETERMINED
    depth = -path.u if path.side is Side.ALPHA else path.u
    span = path.t - path.t[0]
    tail = np.abs(span) >= (1.0 - window) * abs(span[-1])
    seg = depth[tail]
    if seg.size < 2:
        return CharClass.UNDETERMINED
    growth = float(seg[-1] - seg[0])
    if growth >= growth_threshold:
        return plus_minus[1]
    if growth > 0.1 * growth_threshold and np.all(np.diff(seg) >= 0):
        return CharClass.UNDETERMINED
    return plus_minus[0]


def sign_rule_violation(path: CharacteristicPath) -> float:
    """Largest signed breach of the boundary-hit sign rule along ``path``.

    A forward path ending on the boundary must have ``r_x * sign(k) >= 0``
    (``r_x <= 0`` on the alpha side of a law with sigma'' > 0); backward paths
    have the reverse sign.  Returns ``max`` of the offending quantity, which
    is <= 0 when the rule holds.
    """
    sk = np.sign(path.k)
    q = -path.r_x * sk if path.direction is Direction.FORWARD else path.r_x * sk
    q = q[np.isfinite(q)]
    return float(q.max()) if q.size else 0.0


@dataclass
class ClassificationReport:
    counts: dict
    flag: bool
    classes: list
    intersections: list

    def to_dict(self) -> dict:
        return {"counts": self.counts, "flag": self.flag, "classes": self.classes,
                "intersections": self.intersections}


def _intersections(field: StateField, p1: CharacteristicPath, p2: CharacteristicPath) -> list:
    """Crossings of ``p1`` with integer shifts of ``p2``; gap ``r2 - r1 = 2 q(u)`` at each."""
    lo = max(min(p1.t[0], p1.t[-1]), min(p2.t[0], p2.t[-1]))
    hi = min(max(p1.t[0], p1.t[-1]), max(p2.t[0], p2.t[-1]))
    if hi <= lo:
        return []
    tg = np.linspace(lo, hi, 4001)
    o1 = np.argsort(p1.t)
    o2 = np.argsort(p2.t)
    x1 = np.interp(tg, p1.t[o1], p1.x[o1])
    x2 = np.interp(tg, p2.t[o2], p2.x[o2])
    d = x1 - x2
    out = []
    qt = QTransform(field.model, p1.side)
    for kshift in range(int(math.ceil(d.min())), int(math.floor(d.max())) + 1):
        idx = np.flatnonzero((d[:-1] - kshift) * (d[1:] - kshift) <= 0)
        if idx.size == 0:
            continue
        j = idx[0]
        frac = (kshift - d[j]) / (d[j + 1] - d[j]) if d[j + 1] != d[j] else 0.0
        tk = tg[j] + frac * (tg[j + 1] - tg[j])
        xk = x1[j] + frac * (x1[j + 1] - x1[j])
        uk = float(field.sample(tk, xk)["u"])
        try:
            gap = 2.0 * q_eval(qt, uk)
        except Exception:
            gap = float("nan")
        out.append({"k": kshift, "t_k": float(tk), "x_k": float(xk), "gap": gap})
    out.sort(key=lambda r: r["t_k"])
    return out


def classification_monitor(field: StateField, horizon: Optional[float] = None, n_seeds: int = 8,
                   growth_threshold: float = GROWTH_THRESHOLD, **trace_kw) -> ClassificationReport:
    """A/B census of forward (from the first frame) and backward (from the last) paths.

    ``flag`` is raised when both families show class B in the same direction.
    """
    t_first, t_last = float(field.times[0]), float(field.times[-1])
    seeds = (np.arange(n_seeds) + 0.5) / n_seeds
    counts, classes = {}, []
    b_paths = {}
    first_paths = {}
    for direction, t0, hz in ((Direction.FORWARD, t_first, horizon if horizon is not None else t_last),
                              (Direction.BACKWARD, t_last, t_first)):
        for fam in (Family.FIRST, Family.SECOND):
            key = f"{fam.value}/{direction.value}"
            counts[key] = {"A": 0, "B": 0, "Undetermined": 0}
            for x0 in seeds:
                try:
                    path = trace(field, (t0, x0), fam, direction, t_stop=hz, **trace_kw)
                except (StartNotHyperbolic, BoundaryDegeneracy):
                    continue
                cls = classify_path(path, hz, growth_threshold)
                label = {"A": "A", "B": "B"}.get(cls.letter, "Undetermined")
                counts[key][label] += 1
                classes.append({"family": fam.value, "direction": direction.value,
                                "x0": float(x0), "class": cls.value,
                                "termination": path.termination.value})
                first_paths.setdefault((direction, fam), path)
                if label == "B":
                    b_paths.setdefault((direction, fam), path)
    flag = False
    for direction in Direction:
        if (counts[f"First/{direction.value}"]["B"] > 0
                and counts[f"Second/{direction.value}"]["B"] > 0):
            flag = True
    inter = []
    d = Direction.FORWARD
    p1 = b_paths.get((d, Family.FIRST), first_paths.get((d, Family.FIRST)))
    p2 = b_paths.get((d, Family.SECOND), first_paths.get((d, Family.SECOND)))
    if p1 is not None and p2 is not None:
        inter = _intersections(field, p1, p2)
    return ClassificationReport(counts, flag, classes, inter)
