"""Run configuration: sectioned ``key = value`` text, parsed and validated.

Every problem in a file is reported at once.  Syntax and unknown names raise
:class:`ParseError` (with line numbers and close-match suggestions); values
out of range raise :class:`ValidationError` naming ``section.key`` paths.
"""
from __future__ import annotations

import dataclasses
import difflib
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ParseError, ValidationError
from .scenarios import FAMILIES

MODELS = ("quadratic", "cubic", "polynomial")
STOP_POLICIES = ("continue", "stop-on-mixed", "stop-on-elliptic")
HAMILTONIAN_ACTIONS = ("flow", "drift", "orbit", "reduce")


@dataclass
class ModelSection:
    name: str = "quadratic"
    coeffs: tuple = ()          # sigma coefficients, highest power first (polynomial only)
    alpha: float = math.nan
    beta: float = math.nan


@dataclass
class DataSection:
    family: str = "hyperbolic_sine"
    u_mean: float = -1.0
    u_amp: float = 0.1
    v_mean: float = 0.0
    v_amp: float = 0.0
    mode: int = 1
    phase: float = 0.0
    u: float = -1.0
    v: float = 0.0
    C: float = 1.0
    t0: float = 0.0
    wave_family: str = "Second"
    path: str = ""
    winding_C: float = 0.0


@dataclass
class GridSection:
    n_x: int = 256
    t_max: float = 1.0
    cfl: float = 0.4
    lambda_floor: float = 0.1
    dt: float = 0.0             # 0 selects the CFL rule
    filter: bool = False
    filter_order: int = 16


@dataclass
class RunSection:
    stop_policy: str = "stop-on-mixed"
    save_every: int = 4
    max_steps: int = 2_000_000
    grad_max: float = 1e3
    tail_max: float = 1e-4
    seed: int = 0


@dataclass
class DiagnosticsSection:
    characteristics: bool = True
    seeds: int = 16
    extrapolate: float = 0.1
    riccati: bool = True
    classify: bool = False
    energy: bool = False
    residual: bool = True


@dataclass
class HamiltonianSection:
    actions: tuple = ()
    x0: float = 0.0
    p0: float = 1.0
    t_span: float = 1.0
    dt: float = 1e-3
    orbits: tuple = ("1:0", "1:1", "2:1")
    period: float = 0.0


@dataclass
class OutputSection:
    dir: str = "out"
    frames_every: int = 1
    path_samples: int = 400     # rows per traced path in CSVs; 0 keeps every step


@dataclass
class SweepSection:
    parameter: str = ""
    values: tuple = ()


SECTIONS = {
    "model": ModelSection,
    "data": DataSection,
    "grid": GridSection,
    "run": RunSection,
    "diagnostics": DiagnosticsSection,
    "hamiltonian": HamiltonianSection,
    "output": OutputSection,
    "sweep": SweepSection,
}


@dataclass
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    data: DataSection = field(default_factory=DataSection)
    grid: GridSection = field(default_factory=GridSection)
    run: RunSection = field(default_factory=RunSection)
    diagnostics: DiagnosticsSection = field(default_factory=DiagnosticsSection)
    hamiltonian: HamiltonianSection = field(default_factory=HamiltonianSection)
    output: OutputSection = field(default_factory=OutputSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def to_dict(self) -> dict:
        out = {}
        for name in SECTIONS:
            sec = getattr(self, name)
            out[name] = {f.name: _jsonable(getattr(sec, f.name)) for f in dataclasses.fields(sec)}
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return parse_config(_dict_to_text(d))

    def to_text(self) -> str:
        return _dict_to_text(self.to_dict())

    def replace(self, dotted: str, value) -> "RunConfig":
        """Copy with ``section.key`` set from its text form (validated)."""
        d = self.to_dict()
        sec, key = dotted.split(".", 1)
        d[sec][key] = value
        return parse_config(_dict_to_text(d))


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(a) for a in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _dict_to_text(d: dict) -> str:
    lines = []
    for sec, body in d.items():
        lines.append(f"[{sec}]")
        for k, v in body.items():
            lines.append(f"{k} = {_fmt(v)}")
        lines.append("")
    return "\n".join(lines)


def _convert(text: str, default):
    if isinstance(default, bool):
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if isinstance(default, int):
        f = float(text)
        if f != int(f):
            raise ValueError(f"expected an integer, got {text!r}")
        return int(f)
    if isinstance(default, float):
        return float(text)
    if isinstance(default, tuple):
        parts = [p.strip() for p in text.split(",") if p.strip()]
        return tuple(parts)
    return text


def _suggest(word, options) -> str:
    close = difflib.get_close_matches(word, list(options), n=1, cutoff=0.5)
    return f"; did you mean {close[0]!r}?" if close else ""


def parse_config(text: str, validate_values: bool = True) -> RunConfig:
    problems = []
    values: dict = {s: {} for s in SECTIONS}
    seen: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip() if not raw.strip().startswith(("#", ";")) else ""
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                problems.append(f"line {lineno}: malformed section header {raw.strip()!r}")
                section = None
                continue
            name = line[1:-1].strip()
            if name not in SECTIONS:
                problems.append(f"line {lineno}: unknown section [{name}]{_suggest(name, SECTIONS)}")
                section = None
            else:
                section = name
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, val = (p.strip() for p in line.split("=", 1))
        if section is None:
            problems.append(f"line {lineno}: key {key!r} outside a known section")
            continue
        names = {f.name: f for f in dataclasses.fields(SECTIONS[section])}
        if key not in names:
            problems.append(f"line {lineno}: unknown key {key!r} in [{section}]{_suggest(key, names)}")
            continue
        if (section, key) in seen:
            problems.append(f"line {lineno}: duplicate key {section}.{key} (first on line {seen[section, key]})")
            continue
        seen[section, key] = lineno
        default = getattr(SECTIONS[section](), key)
        if isinstance(default, float) and val.lower() in ("nan", "none", ""):
            values[section][key] = math.nan
            continue
        try:
            values[section][key] = _convert(val, default)
        except ValueError as exc:
            problems.append(f"line {lineno}: {section}.{key}: {exc}")
    if problems:
        raise ParseError(problems)
    cfg = RunConfig(**{s: SECTIONS[s](**values[s]) for s in SECTIONS})
    if validate_values:
        validate(cfg)
    return cfg


def _choice(problems, path, value, options):
    if value not in options:
        problems.append(f"{path}: {value!r} is not one of {list(options)}{_suggest(str(value), options)}")


def validate(cfg: RunConfig) -> RunConfig:
    p: list = []
    _choice(p, "model.name", cfg.model.name, MODELS)
    if cfg.model.name == "polynomial":
        try:
            coeffs = [float(c) for c in cfg.model.coeffs]
            if len(coeffs) < 2:
                p.append("model.coeffs: need at least two coefficients")
        except ValueError:
            p.append("model.coeffs: coefficients must be numbers")
        if math.isnan(cfg.model.alpha) or math.isnan(cfg.model.beta):
            p.append("model.alpha/model.beta: required for a polynomial law")
        elif cfg.model.alpha > cfg.model.beta:
            p.append("model.alpha: must not exceed model.beta")
    _choice(p, "data.family", cfg.data.family, FAMILIES)
    if cfg.data.mode < 1:
        p.append("data.mode: must be >= 1")
    if cfg.data.u_amp < 0 or cfg.data.v_amp < 0:
        p.append("data.u_amp/data.v_amp: amplitudes must be >= 0")
    _choice(p, "data.wave_family", cfg.data.wave_family, ("First", "Second"))
    if cfg.data.family == "file" and not cfg.data.path:
        p.append("data.path: required when data.family = file")
    g = cfg.grid
    if not 8 <= g.n_x <= 65536:
        p.append(f"grid.n_x: {g.n_x} outside [8, 65536]")
    elif g.n_x % 2:
        p.append("grid.n_x: must be even")
    if not g.t_max > 0 or not math.isfinite(g.t_max):
        p.append("grid.t_max: must be positive and finite")
    if not 0 < g.cfl <= 2.0:
        p.append("grid.cfl: must lie in (0, 2]")
    if not g.lambda_floor > 0:
        p.append("grid.lambda_floor: must be positive")
    if g.dt < 0:
        p.append("grid.dt: must be >= 0")
    if g.filter_order < 2 or g.filter_order % 2:
        p.append("grid.filter_order: must be an even integer >= 2")
    r = cfg.run
    _choice(p, "run.stop_policy", r.stop_policy, STOP_POLICIES)
    if r.save_every < 1:
        p.append("run.save_every: must be >= 1")
    if r.max_steps < 1:
        p.append("run.max_steps: must be >= 1")
    if not r.grad_max > 0:
        p.append("run.grad_max: must be positive")
    if not 0 < r.tail_max < 1:
        p.append("run.tail_max: must lie in (0, 1)")
    if r.seed < 0:
        p.append("run.seed: must be >= 0")
    d = cfg.diagnostics
    if d.seeds < 1:
        p.append("diagnostics.seeds: must be >= 1")
    if d.extrapolate < 0:
        p.append("diagnostics.extrapolate: must be >= 0")
    h = cfg.hamiltonian
    for a in h.actions:
        _choice(p, "hamiltonian.actions", a, HAMILTONIAN_ACTIONS)
    if not h.t_span > 0:
        p.append("hamiltonian.t_span: must be positive")
    if not 0 < h.dt <= 0.1:
        p.append("hamiltonian.dt: must lie in (0, 0.1]")
    if h.period < 0:
        p.append("hamiltonian.period: must be >= 0")
    for o in h.orbits:
        try:
            m, n = parse_mn(o)
            if m < 1:
                raise ValueError
        except ValueError:
            p.append(f"hamiltonian.orbits: {o!r} is not 'm:n' with m >= 1")
    if cfg.output.path_samples < 0:
        p.append("output.path_samples: must be >= 0")
    if cfg.output.frames_every < 1:
        p.append("output.frames_every: must be >= 1")
    if cfg.sweep.parameter:
        if "." not in cfg.sweep.parameter:
            p.append("sweep.parameter: expected 'section.key'")
        else:
            sec, key = cfg.sweep.parameter.split(".", 1)
            if sec not in SECTIONS or key not in {f.name for f in dataclasses.fields(SECTIONS[sec])}:
                p.append(f"sweep.parameter: unknown field {cfg.sweep.parameter!r}")
        if not cfg.sweep.values:
            p.append("sweep.values: required when sweep.parameter is set")
    if p:
        raise ValidationError(p)
    return cfg


def parse_mn(text: str) -> tuple:
    m, n = text.split(":")
    return int(m), int(n)


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
