"""Config-driven runs: solver, diagnostics and artifact emission."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import characteristics as ch
from . import energy as en
from . import evolution as ev
from . import hamiltonian as hm
from . import io
from .config import RunConfig, parse_mn
from .constitutive import make_polynomial, Kind
from .errors import (BoundaryDegeneracy, DegenerateInterval, NoConvergence, OutsideEllipticBand,
                     StartNotHyperbolic, StepFailure)
from .kernels import active_backend
from .riemann import Family
from .scenarios import initial_data, model_by_name

log = logging.getLogger(__name__)

TASKS = ("simulate", "characteristics", "riccati", "energy", "hamiltonian")


@dataclass
class Outcome:
    status: int
    out_dir: str
    manifest: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    summary: list = field(default_factory=list)


def build_model(cfg: RunConfig):
    if cfg.model.name == "polynomial":
        return make_polynomial([float(c) for c in cfg.model.coeffs], cfg.model.alpha,
                               cfg.model.beta, Kind.CUSTOM, "polynomial")
    return model_by_name(cfg.model.name)


def _data_params(cfg: RunConfig) -> dict:
    d = cfg.data
    return {"u_mean": d.u_mean, "u_amp": d.u_amp, "v_mean": d.v_mean, "v_amp": d.v_amp,
            "mode": d.mode, "phase": d.phase, "u": d.u, "v": d.v, "C": d.C, "t0": d.t0,
            "family": d.wave_family, "path": d.path, "winding_C": d.winding_C}


def settings_from(cfg: RunConfig) -> ev.SolverSettings:
    g, r = cfg.grid, cfg.run
    return ev.SolverSettings(cfl=g.cfl, lambda_floor=g.lambda_floor, dt=g.dt or None,
                             filter=g.filter, filter_order=g.filter_order,
                             grad_max=r.grad_max, tail_max=r.tail_max)


def simulate(cfg: RunConfig):
    model = build_model(cfg)
    u0, v0, C, t0 = initial_data(model, cfg.data.family, cfg.grid.n_x, _data_params(cfg))
    fld, rep = ev.run(model, u0, v0, t0 + cfg.grid.t_max, settings_from(cfg), winding_C=C,
                      stop_policy=cfg.run.stop_policy, t0=t0, save_every=cfg.run.save_every,
                      max_steps=cfg.run.max_steps)
    return fld, rep


def _seed_positions(cfg: RunConfig) -> np.ndarray:
    rng = np.random.default_rng(cfg.run.seed)
    n = cfg.diagnostics.seeds
    return (np.arange(n) + rng.uniform(0.0, 1.0)) / n


def _write_frames(out, cfg, fld):
    x = fld.x
    rows = []
    for i in range(0, len(fld.frames), cfg.output.frames_every):
        fr = fld.frames[i]
        rows.extend(zip([fr.t] * len(x), x, fr.u, fr.v, fld.full_v(i)))
    return io.write_csv(os.path.join(out, "frames.csv"), ("t", "x", "u", "v_periodic", "v"), rows)


def _trace_all(cfg, fld, want_classes: bool):
    seeds = _seed_positions(cfg)
    t0 = float(fld.times[0])
    horizon = float(fld.times[-1])
    paths, rows = [], []
    for fam in (Family.FIRST, Family.SECOND):
        for x0 in seeds:
            try:
                p = ch.trace(fld, (t0, float(x0)), fam, ch.Direction.FORWARD)
            except (StartNotHyperbolic, BoundaryDegeneracy):
                continue
            t_star = ch._blowup_from_path(p, cfg.diagnostics.extrapolate)
            cls = ch.classify_path(p, horizon).value if want_classes else None
            rows.append((len(paths), fam.value, p.direction.value, t0, float(x0), p.riccati.z0,
                         p.termination.value, p.t_end, t_star, cls))
            paths.append(p)
    return paths, rows


def _thin(n: int, keep: int) -> np.ndarray:
    """Indices of about ``keep`` evenly spaced rows out of ``n`` (first and last included)."""
    if keep <= 0 or n <= keep:
        return np.arange(n)
    return np.unique(np.linspace(0, n - 1, keep).round().astype(int))


def _finite_min(vals):
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


def orchestrate(cfg: RunConfig, task: str = "simulate", out_dir: Optional[str] = None) -> Outcome:
    """Run ``task`` for ``cfg`` and write artifacts under ``out_dir``.

    Scientific outcomes (blow-up, elliptic onset, failed verdicts) never make
    the status nonzero; IO failures raise ``OSError``.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    out = out_dir or cfg.output.dir
    if os.path.exists(out) and not os.path.isdir(out):
        raise NotADirectoryError(f"output path {out!r} exists and is not a directory")
    os.makedirs(out, exist_ok=True)
    files, summary = [], []
    fld, rep = simulate(cfg)
    verdicts = {}
    manifest = {"task": task, "backend": active_backend(), "config": cfg.to_dict(),
                "config_text": cfg.to_text(), "report": rep.to_dict(), "n_frames": len(fld.frames)}
    summary.append(f"stop={rep.stop_reason.value} t_end={rep.t_end:.6g}"
                   + (f" blowup_time={rep.blowup_time:.6g}" if rep.blowup_time is not None else ""))

    files.append(_write_frames(out, cfg, fld))
    files.append(io.write_csv(os.path.join(out, "history.csv"), ("t", "max_grad", "tail"),
                              ((t, g, tl) for (t, g), (_, tl) in zip(rep.grad_history, rep.tail_history))))
    if cfg.diagnostics.residual and len(fld.frames) >= 3:
        rows = []
        for i in range(1, len(fld.frames) - 1):
            ru, rv = ev.residual(fld, i)
            rows.append((fld.times[i], ru, rv))
        files.append(io.write_csv(os.path.join(out, "residual.csv"), ("t", "res_u", "res_v"), rows))

    want_char = task in ("characteristics", "riccati") or (
        task == "simulate" and (cfg.diagnostics.characteristics or cfg.diagnostics.riccati))
    if want_char and len(fld.frames) >= 2:
        paths, prow = _trace_all(cfg, fld, task == "characteristics" or cfg.diagnostics.classify)
        files.append(io.write_csv(os.path.join(out, "paths.csv"),
                                  ("path", "family", "direction", "t0", "x0", "z0", "termination",
                                   "t_end", "t_star", "class"), prow))
        t_pred = _finite_min(r[8] for r in prow)
        manifest["t_pred"] = t_pred
        manifest["sign_rule_breach"] = max(
            [ch.sign_rule_violation(p) for p in paths if p.termination is ch.Termination.BOUNDARY_HIT],
            default=None)
        if t_pred is not None:
            summary.append(f"t_pred={t_pred:.6g}")
        if task == "characteristics" or cfg.diagnostics.characteristics:
            rows = []
            for j, p in enumerate(paths):
                tab = p.table()
                for r in tab[_thin(len(tab), cfg.output.path_samples)]:
                    rows.append((j, p.family.value, p.direction.value) + tuple(r))
            files.append(io.write_csv(os.path.join(out, "characteristics.csv"),
                                      ("path", "family", "direction", "t", "x", "u", "lambda", "z", "k",
                                       "k_integral"), rows))
        if task == "characteristics" or cfg.diagnostics.classify:
            rep2 = ch.classification_monitor(fld, n_seeds=cfg.diagnostics.seeds)
            manifest["classification"] = rep2.to_dict()
            verdicts["both_families_B"] = rep2.flag
        if task == "riccati" or cfg.diagnostics.riccati:
            rows = []
            for j, p in enumerate(paths):
                rec = p.riccati
                den = rec.denominator()
                ex = rec.exact()
                idx = _thin(len(den), cfg.output.path_samples)
                for a, b, c, d, e in zip(rec.k_integral[idx, 0], rec.k_integral[idx, 1], den[idx],
                                         ex[idx], rec.z_integrated[idx]):
                    rows.append((j, a, b, c, d, e))
            files.append(io.write_csv(os.path.join(out, "riccati.csv"),
                                      ("path", "t", "k_integral", "denominator", "z_exact",
                                       "z_integrated"), rows))

    if task == "energy" or (task == "simulate" and cfg.diagnostics.energy):
        try:
            trace = en.concavity_monitor(fld)
            files.append(io.write_array(os.path.join(out, "energy.csv"),
                                        ("t", "E", "E_ddot_integral", "E_ddot_fd"), trace.table()))
            verdicts["energy"] = trace.verdict.value
            manifest["energy_reasons"] = trace.reasons
            summary.append(f"energy verdict {trace.verdict.value}")
        except (OutsideEllipticBand, DegenerateInterval) as exc:
            verdicts["energy"] = "NotApplicable"
            manifest["energy_reasons"] = [str(exc)]
            summary.append(f"energy not applicable: {exc}")

    if task == "hamiltonian":
        _hamiltonian(cfg, fld, out, files, manifest, summary, verdicts)

    manifest["verdicts"] = verdicts
    manifest["files"] = sorted(os.path.relpath(f, out) for f in files)
    files.append(io.write_json(os.path.join(out, "manifest.json"), manifest))
    return Outcome(0, out, manifest, files, summary)


def _hamiltonian(cfg, fld, out, files, manifest, summary, verdicts):
    h = cfg.hamiltonian
    if cfg.model.name != "quadratic":
        manifest["hamiltonian"] = "skipped: the particle correspondence needs the quadratic law"
        summary.append("hamiltonian skipped (model is not quadratic)")
        return
    pot = hm.FieldPotential(fld, h.period)
    actions = h.actions or ("flow", "drift")
    t0 = float(fld.times[0])
    t_end = t0 + h.t_span
    if h.period <= 0:
        t_end = min(t_end, float(fld.times[-1]))
    res = {}
    if ("flow" in actions or "drift" in actions) and t_end > t0:
        try:
            tr = hm.flow(pot, (t0, h.x0, h.p0), t_end, h.dt)
            files.append(io.write_array(os.path.join(out, "trajectory.csv"),
                                        ("t", "x", "p", "H", "F"), tr.table()))
            res["f_drift"] = hm.f_drift(pot, None, tr)
            summary.append(f"f_drift={res['f_drift']:.3e}")
        except StepFailure as exc:
            res["flow_error"] = str(exc)
    orbits = []
    if "orbit" in actions or "reduce" in actions:
        rows = []
        for item in h.orbits:
            m, n = parse_mn(item)
            try:
                o = hm.find_mn_orbit(pot, m, n, x0=h.x0, t0=t0)
            except NoConvergence as exc:
                res.setdefault("orbit_errors", []).append(str(exc))
                continue
            orbits.append(o)
            rows.extend((m, n) + tuple(r) for r in o.trajectory.table())
        files.append(io.write_csv(os.path.join(out, "orbits.csv"),
                                  ("m", "n", "t", "x", "p", "H", "F"), rows))
    if "reduce" in actions and orbits:
        rr = hm.reduction_check(pot, None, orbits)
        files.append(io.write_csv(os.path.join(out, "reduction.csv"),
                                  ("m", "n", "A", "B", "mismatch", "seam_dv"),
                                  ((r["m"], r["n"], rr.A, rr.B, r["mismatch"], r["seam_dv"])
                                   for r in rr.per_orbit)))
        res["reduction"] = rr.to_dict()
        summary.append(f"A={rr.A:.3e} B={rr.B:.3e} max|Am+Bn|={rr.max_mismatch:.3e}")
    manifest["hamiltonian"] = res


def _sweep_member(args):
    text, dotted, value, sub, task = args
    from .config import parse_config
    cfg = parse_config(text).replace(dotted, value)
    o = orchestrate(cfg, task, sub)
    rep = o.manifest["report"]
    return (value, os.path.basename(sub), rep["stop_reason"], rep["t_end"], rep["blowup_time"],
            o.manifest.get("t_pred"))


def sweep(cfg: RunConfig, out_dir: Optional[str] = None, workers: int = 1,
          task: str = "simulate") -> Outcome:
    """Run one orchestration per ``sweep.values`` entry, each in its own subdirectory."""
    out = out_dir or cfg.output.dir
    if os.path.exists(out) and not os.path.isdir(out):
        raise NotADirectoryError(f"output path {out!r} exists and is not a directory")
    os.makedirs(out, exist_ok=True)
    dotted = cfg.sweep.parameter
    values = list(cfg.sweep.values)
    if not dotted or not values:
        raise ValueError("sweep needs [sweep] parameter and values")
    text = cfg.to_text()
    jobs = [(text, dotted, v, os.path.join(out, f"run_{i:03d}"), task) for i, v in enumerate(values)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_member, jobs))
    else:
        rows = [_sweep_member(j) for j in jobs]
    files = [io.write_csv(os.path.join(out, "sweep.csv"),
                          ("value", "dir", "stop_reason", "t_end", "blowup_time", "t_pred"), rows)]
    manifest = {"task": "sweep", "parameter": dotted, "values": values, "config": cfg.to_dict(),
                "members": [r[1] for r in rows]}
    files.append(io.write_json(os.path.join(out, "manifest.json"), manifest))
    return Outcome(0, out, manifest, files, [f"{r[1]}: {dotted}={r[0]} stop={r[2]}" for r in rows])
