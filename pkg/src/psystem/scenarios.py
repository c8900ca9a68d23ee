"""Initial-data families and the shipped hyperbolic scenario suite."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import spectral
from .constitutive import SigmaModel, make_cubic, make_quadratic
from .riemann import QTransform, Side, q_eval

FAMILIES = ("constant", "hyperbolic_sine", "simple_wave", "exact_linear", "file")


def model_by_name(name: str) -> SigmaModel:
    if name in ("quadratic", "type_I"):
        return make_quadratic()
    if name in ("cubic", "type_II"):
        return make_cubic()
    raise ValueError(f"unknown model {name!r}")


def _q_profile(model: SigmaModel, u: np.ndarray) -> np.ndarray:
    side = Side.ALPHA if np.all(u < model.alpha) else Side.BETA
    qt = QTransform(model, side)
    q = np.array([q_eval(qt, float(a)) for a in u])
    return -q if side is Side.ALPHA else q


def initial_data(model: SigmaModel, family: str, n_x: int, params: Optional[dict] = None):
    """Return ``(u0, v0_periodic, winding_C, t0)`` on the ``n_x`` grid."""
    p = dict(params or {})
    x = spectral.grid(n_x)
    mode = int(p.get("mode", 1))
    phase = float(p.get("phase", 0.0))
    if family == "constant":
        u = np.full(n_x, float(p.get("u", -1.0)))
        v = np.full(n_x, float(p.get("v", 0.0)))
        return u, v, float(p.get("winding_C", 0.0)), float(p.get("t0", 0.0))
    if family == "hyperbolic_sine":
        arg = 2 * np.pi * mode * x + phase
        u = float(p.get("u_mean", -1.0)) + float(p.get("u_amp", 0.1)) * np.sin(arg)
        v = float(p.get("v_mean", 0.0)) + float(p.get("v_amp", 0.0)) * np.cos(arg)
        return u, v, float(p.get("winding_C", 0.0)), float(p.get("t0", 0.0))
    if family == "simple_wave":
        # the other family's invariant vanishes: v = sign * F(u), F' = sqrt(-sigma')
        arg = 2 * np.pi * mode * x + phase
        u = float(p.get("u_mean", -1.0)) + float(p.get("u_amp", 0.1)) * np.sin(arg)
        sgn = 1.0 if str(p.get("family", "Second")) == "First" else -1.0
        v = sgn * _q_profile(model, u)
        return u, v, 0.0, float(p.get("t0", 0.0))
    if family == "exact_linear":
        C = float(p.get("C", 1.0))
        t0 = float(p.get("t0", 0.0))
        return np.full(n_x, -C * t0), np.zeros(n_x), C, t0
    if family == "file":
        return load_profile(p["path"], n_x) + (float(p.get("winding_C", 0.0)), float(p.get("t0", 0.0)))
    raise ValueError(f"unknown initial-data family {family!r}; expected one of {FAMILIES}")


def load_profile(path: str, n_x: int):
    """Read ``x,u,v`` rows (header optional) sampled on the uniform ``n_x`` grid."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().startswith("#"):
                continue
            try:
                rows.append([float(a) for a in rec[:3]])
            except ValueError:
                continue
    arr = np.asarray(rows, dtype=float)
    if arr.shape[0] != n_x or arr.shape[1] < 3:
        raise ValueError(f"{path}: expected {n_x} rows of x,u,v, got shape {arr.shape}")
    return arr[:, 1].copy(), arr[:, 2].copy()


@dataclass(frozen=True)
class Scenario:
    name: str
    model: str
    family: str
    params: dict = field(default_factory=dict)
    t_max: float = 20.0
    n_x: int = 256

    def build(self, n_x: Optional[int] = None):
        n = n_x or self.n_x
        m = model_by_name(self.model)
        return (m,) + initial_data(m, self.family, n, self.params)


HYPERBOLIC_SUITE = (
    Scenario("H1", "quadratic", "hyperbolic_sine", {"u_mean": -1.0, "u_amp": 0.1}, 20.0, 512),
    Scenario("H2", "quadratic", "hyperbolic_sine",
             {"u_mean": -2.0, "u_amp": 0.3, "v_amp": 0.2, "phase": np.pi / 2}, 20.0),
    Scenario("H3", "quadratic", "simple_wave", {"u_mean": -1.5, "u_amp": 0.2}, 20.0),
    Scenario("H4", "cubic", "hyperbolic_sine", {"u_mean": -2.0, "u_amp": 0.2}, 20.0),
    Scenario("H5", "cubic", "hyperbolic_sine", {"u_mean": 2.0, "u_amp": 0.2, "v_amp": 0.1}, 20.0),
    Scenario("H6", "cubic", "simple_wave", {"u_mean": -1.6, "u_amp": 0.3, "family": "First"}, 20.0),
)


def scenario(name: str) -> Scenario:
    for s in HYPERBOLIC_SUITE:
        if s.name == name:
            return s
    raise KeyError(name)


def scenario_config(name: str, out_dir: str = "out") -> str:
    """Configuration text reproducing a suite scenario."""
    sc = scenario(name)
    lines = ["[model]", f"name = {sc.model}", "", "[data]", f"family = {sc.family}"]
    for k, v in sc.params.items():
        lines.append(f"{'wave_family' if k == 'family' else k} = {v!r}" if not isinstance(v, str)
                     else f"{'wave_family' if k == 'family' else k} = {v}")
    lines += ["", "[grid]", f"n_x = {sc.n_x}", f"t_max = {sc.t_max!r}", "",
              "[run]", "save_every = 4", "",
              "[diagnostics]", "seeds = 16", "extrapolate = 0.1", "",
              "[output]", f"dir = {out_dir}", "frames_every = 16", ""]
    return "\n".join(lines)
