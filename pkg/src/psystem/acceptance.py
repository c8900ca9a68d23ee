"""End-to-end acceptance checks, one function per criterion.

Each check returns a :class:`CheckResult` carrying the measured quantities,
the thresholds they were compared against and the wall-clock runtime.
"""
from __future__ import annotations

import filecmp
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import characteristics as ch
from . import energy as en
from . import evolution as ev
from . import hamiltonian as hm
from .constitutive import make_cubic, make_quadratic
from .field import StateField
from .riemann import Family, QTransform, RiemannPair, Side, from_riemann, genuine_nonlinearity, \
    q_eval, to_riemann


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    runtime: float
    limit: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        bits = ", ".join(f"{k}={_short(v)}" for k, v in self.details.items())
        return f"[{state}] {self.number:2d} {self.name} ({self.runtime:.1f}s / {self.limit:g}s) {bits}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def _timed(number, name, limit, fn: Callable[[], tuple]) -> CheckResult:
    t0 = time.perf_counter()
    ok, details = fn()
    dt = time.perf_counter() - t0
    return CheckResult(number, name, bool(ok) and dt <= limit, dt, limit, details)


def exact_family_residual(n_x: int = 256, t_end: float = 5.0) -> CheckResult:
    def body():
        m = make_quadratic()
        worst = 0.0
        for C in (1.0, 2.0):
            fld, rep = ev.run(m, np.zeros(n_x), np.zeros(n_x), t_end, winding_C=C,
                              stop_policy=ev.StopPolicy.CONTINUE, save_every=8)
            if rep.stop_reason is not ev.StopReason.TIME_LIMIT:
                return False, {"C": C, "stop": rep.stop_reason.value}
            for i in range(1, len(fld.frames) - 1):
                worst = max(worst, *ev.residual(fld, i))
        return worst <= 1e-8, {"max_residual": worst}
    return _timed(1, "exact-family residual", 10.0, body)


def riemann_round_trip(n_points: int = 1000, seed: int = 0) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        cases = ((make_quadratic(), Side.ALPHA), (make_cubic(), Side.ALPHA), (make_cubic(), Side.BETA))
        eu = ev_ = 0.0
        for model, side in cases:
            qt = QTransform(model, side)
            anchor = model.alpha if side is Side.ALPHA else model.beta
            o = -1.0 if side is Side.ALPHA else 1.0
            us = anchor + o * rng.uniform(0.05, 4.0, n_points)
            vs = rng.uniform(-5.0, 5.0, n_points)
            for u, v in zip(us, vs):
                u2, v2 = from_riemann(qt, to_riemann(qt, float(u), float(v)))
                eu = max(eu, abs(u2 - u))
                ev_ = max(ev_, abs(v2 - v))
        return eu <= 1e-10 and ev_ <= 1e-12, {"err_u": eu, "err_v": ev_, "points": 3 * n_points}
    return _timed(2, "Riemann round-trip", 5.0, body)


def _h1_field(n_x: int):
    m = make_quadratic()
    x = np.arange(n_x) / n_x
    return ev.run(m, -1.0 + 0.1 * np.sin(2 * np.pi * x), np.zeros(n_x), 20.0, save_every=4)


def riccati_equivalence(n_paths: int = 24) -> CheckResult:
    def body():
        fld, rep = _h1_field(256)
        worst, used, samples = 0.0, 0, 0
        for j in range(n_paths):
            fam = Family.FIRST if j % 2 == 0 else Family.SECOND
            p = ch.trace(fld, (fld.times[0], (j // 2 + 0.25) / (n_paths // 2)), fam)
            rec = p.riccati
            den = rec.denominator()
            keep = np.abs(den) > 0.1
            if not keep.any():
                continue
            used += 1
            samples += int(keep.sum())
            worst = max(worst, float(np.max(np.abs(rec.exact()[keep] - rec.z_integrated[keep]))))
        return used >= 20 and worst <= 1e-6, {"paths": used, "samples": samples, "max_diff": worst}
    return _timed(3, "Riccati closed form vs integration", 30.0, body)


def blowup_demonstration(n_x: int = 512, n_seeds: int = 64, extrapolate: float = 0.1):
    """Criteria 4 and 5 share their runs; returns both results."""
    from .scenarios import HYPERBOLIC_SUITE
    t0 = time.perf_counter()
    fld, rep = _h1_field(n_x)
    t_obs = rep.blowup_time
    seeds = (np.arange(n_seeds) + 0.5) / n_seeds
    t_pred, _ = ch.earliest_blowup(fld, seeds, extrapolate=extrapolate)
    fields = [("H1", fld, rep)]
    smooth_forever = []
    for sc in HYPERBOLIC_SUITE[1:]:
        m, u0, v0, C, tt = sc.build()
        f2, r2 = ev.run(m, u0, v0, sc.t_max, winding_C=C, t0=tt, save_every=4)
        fields.append((sc.name, f2, r2))
        if r2.stop_reason is not ev.StopReason.BLOW_UP:
            smooth_forever.append(sc.name)
    # boundary-hit paths in these runs
    hits, breach = 0, -np.inf
    for name, f2, _ in fields:
        for fam in (Family.FIRST, Family.SECOND):
            for x0 in (np.arange(16) + 0.5) / 16:
                try:
                    p = ch.trace(f2, (f2.times[0], x0), fam)
                except Exception:
                    continue
                if p.termination is ch.Termination.BOUNDARY_HIT:
                    hits += 1
                    breach = max(breach, ch.sign_rule_violation(p))
    runtime = time.perf_counter() - t0
    rel = abs(t_obs - t_pred) / t_pred if (t_obs is not None and t_pred) else np.inf
    ok4 = (rep.stop_reason is ev.StopReason.BLOW_UP and np.isfinite(rel) and rel <= 0.05
           and not smooth_forever and len(fields) >= 5)
    r4 = CheckResult(4, "blow-up demonstration", ok4 and runtime <= 120.0, runtime, 120.0,
                     {"T_obs": t_obs, "T_pred": t_pred, "rel": rel, "suite": len(fields),
                      "smooth_forever": smooth_forever or "none"})
    ok5 = hits == 0 or breach <= 1e-3
    r5 = CheckResult(5, "sign rule on boundary hits", ok5 and runtime <= 120.0, runtime, 120.0,
                     {"boundary_hits": hits, "max_breach": float(breach) if hits else 0.0})
    return r4, r5


def genuine_nonlinearity_check(n_points: int = 100, seed: int = 1) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        count = 0
        for model, sides in ((make_quadratic(), (Side.ALPHA,)), (make_cubic(), (Side.ALPHA, Side.BETA))):
            per_side = n_points // len(sides)
            for side in sides:
                qt = QTransform(model, side)
                anchor = model.alpha if side is Side.ALPHA else model.beta
                o = -1.0 if side is Side.ALPHA else 1.0
                for u in anchor + o * rng.uniform(0.2, 3.0, per_side):
                    r = to_riemann(qt, float(u), 0.3)
                    h = 1e-5

                    def speed_r1(r1):
                        uu, _ = from_riemann(qt, RiemannPair(r1, r.r2))
                        lam = np.sqrt(-model.dsigma(uu))
                        # the speed transporting r1: +sqrt on the alpha side, -sqrt on beta
                        return lam if side is Side.ALPHA else -lam
                    fd = (speed_r1(r.r1 + h) - speed_r1(r.r1 - h)) / (2 * h)
                    gn = genuine_nonlinearity(model, float(u))
                    worst = max(worst, abs(fd - gn))
                    count += 1
        return worst <= 1e-4, {"points": count, "max_diff": worst}
    return _timed(6, "genuine nonlinearity", 5.0, body)


def energy_concavity() -> CheckResult:
    def body():
        m = make_cubic()
        res = {}
        ts = np.linspace(-1.0, 1.0, 41)
        const = StateField.from_functions(m, 64, ts, lambda t, x: 0.3 + 0 * x, lambda t, x: 0.1 + 0 * x)
        analytic = StateField.from_functions(m, 64, ts, lambda t, x: -0.5 * t + 0 * x, None, winding_C=0.5)
        n = 64
        x = np.arange(n) / n
        adv, _ = ev.run(m, 0.2 * np.sin(2 * np.pi * x), 0.1 * np.cos(2 * np.pi * x), 0.1,
                        ev.SolverSettings(filter=True), stop_policy=ev.StopPolicy.CONTINUE)
        ok = True
        for name, fld in (("constant", const), ("analytic", analytic), ("solver", adv)):
            tr = en.concavity_monitor(fld)
            res[name] = tr.verdict.value
            res[name + "_max_Eddot"] = float(tr.E_ddot_integral.max())
            ok &= tr.verdict is en.Verdict.PASS and tr.E_ddot_integral.max() <= 1e-10
        neg = StateField.from_functions(m, 128, ts, lambda t, x: 0.5 * np.sin(2 * np.pi * x) + 0 * t, None)
        trn = en.concavity_monitor(neg)
        res["negative_control"] = trn.verdict.value
        ok &= trn.verdict is en.Verdict.FAIL
        return ok, res
    return _timed(7, "energy concavity", 30.0, body)


def f_conservation() -> CheckResult:
    def body():
        m = make_quadratic()
        ts = np.linspace(0.0, 2.0, 21)
        drifts = []
        const = StateField.from_functions(m, 64, ts, lambda t, x: 1.0 + 0 * x)
        for C in (1.0, 2.0):
            lin = StateField.from_functions(m, 64, ts, lambda t, x, C=C: -C * t + 0 * x, None, winding_C=C)
            for x0, p0 in ((0.1, 0.5), (0.4, -0.7)):
                pot = hm.FieldPotential(lin)
                drifts.append(hm.f_drift(pot, None, hm.flow(pot, (0.0, x0, p0), 2.0)))
        pot = hm.FieldPotential(const)
        for x0, p0 in ((0.0, 1.0), (0.3, -0.4), (0.7, 2.0), (0.5, 0.0), (0.9, 0.25), (0.2, -1.5)):
            drifts.append(hm.f_drift(pot, None, hm.flow(pot, (0.0, x0, p0), 2.0)))
        ctrl = hm.AnalyticPotential(lambda t, x: np.sin(2 * np.pi * x),
                                    lambda t, x: 2 * np.pi * np.cos(2 * np.pi * x))
        dc = hm.f_drift(ctrl, lambda t, x: 0 * x, hm.flow(ctrl, (0.0, 0.0, 1.0), 1.0))
        return (len(drifts) >= 10 and max(drifts) <= 1e-7 and dc >= 1e-2,
                {"trajectories": len(drifts), "max_drift": max(drifts), "control_drift": dc})
    return _timed(8, "F-conservation dichotomy", 20.0, body)


def reduction_identity() -> CheckResult:
    def body():
        m = make_quadratic()
        ts = np.linspace(0.0, 2.0, 9)
        const = StateField.from_functions(m, 64, ts, lambda t, x: 0.5 + 0 * x, lambda t, x: 0.2 + 0 * x)
        pot = hm.FieldPotential(const, period=2.0)
        orbits = [hm.find_mn_orbit(pot, a, b, x0=0.1) for a, b in ((1, 0), (1, 1), (2, 1))]
        rr = hm.reduction_check(pot, None, orbits)
        planted_u = hm.AnalyticPotential(lambda t, x: 0.1 * np.cos(2 * np.pi * x),
                                         lambda t, x: -0.2 * np.pi * np.sin(2 * np.pi * x))
        v_planted = lambda t, x: 2.0 * x + 0.1 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * t)
        orb = hm.find_mn_orbit(planted_u, 1, 1, x0=0.1)
        rp = hm.reduction_check(planted_u, v_planted, [orb])
        ok = (abs(rr.A) <= 1e-8 and abs(rr.B) <= 1e-8 and rr.max_mismatch <= 1e-7
              and abs(rp.max_mismatch - 2.0) <= 1e-6)
        return ok, {"A": rr.A, "B": rr.B, "max_mismatch": rr.max_mismatch,
                    "planted_mismatch": rp.per_orbit[0]["mismatch"]}
    return _timed(9, "reduction identity", 30.0, body)


def self_convergence(t_end: float = 0.2) -> CheckResult:
    def body():
        m = make_quadratic()
        sols = {}
        for n in (128, 256, 512, 1024):
            x = np.arange(n) / n
            settings = ev.SolverSettings(dt=t_end / (n // 2))
            fld, rep = ev.run(m, -1.0 + 0.1 * np.sin(2 * np.pi * x), 0.05 * np.cos(2 * np.pi * x),
                              t_end, settings, save_every=10**9)
            sols[n] = fld.frames[-1].u
        e1 = float(np.max(np.abs(sols[128] - sols[256][::2])))
        e2 = float(np.max(np.abs(sols[256] - sols[512][::2])))
        e3 = float(np.max(np.abs(sols[512] - sols[1024][::2])))
        order = float(np.log2(e1 / e2))
        return order >= 4.0, {"err_128_256": e1, "err_256_512": e2, "err_512_1024": e3, "order": order}
    return _timed(10, "self-convergence", 60.0, body)


def determinism() -> CheckResult:
    def body():
        from .config import parse_config
        from .orchestrate import orchestrate
        from .scenarios import scenario_config
        cfg = parse_config(scenario_config("H1"))
        with tempfile.TemporaryDirectory() as tmp:
            a, b = os.path.join(tmp, "a"), os.path.join(tmp, "b")
            oa = orchestrate(cfg, "simulate", a)
            orchestrate(cfg, "simulate", b)
            csvs = sorted(f for f in os.listdir(a) if f.endswith(".csv"))
            same = [filecmp.cmp(os.path.join(a, f), os.path.join(b, f), shallow=False) for f in csvs]
        return all(same) and len(csvs) > 0, {"csv_files": len(csvs), "identical": sum(same),
                                            "blowup_time": oa.manifest["report"]["blowup_time"]}
    return _timed(11, "determinism", 120.0, body)


def run_all(report: Callable[[str], None] = print) -> list:
    results = [exact_family_residual(), riemann_round_trip(), riccati_equivalence()]
    results.extend(blowup_demonstration())
    results.extend([genuine_nonlinearity_check(), energy_concavity(), f_conservation(),
                    reduction_identity(), self_convergence(), determinism()])
    for r in results:
        report(r.line())
    return results
