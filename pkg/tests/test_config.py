import math

import pytest
from hypothesis import given, settings, strategies as st

from psystem.config import RunConfig, parse_config, parse_mn
from psystem.errors import ParseError, ValidationError
from psystem.scenarios import HYPERBOLIC_SUITE, scenario_config


def test_minimal_config_uses_defaults():
    cfg = parse_config("[model]\nname = cubic\n")
    assert cfg.model.name == "cubic"
    assert cfg.grid.n_x == 256 and cfg.run.stop_policy == "stop-on-mixed"
    assert math.isnan(cfg.model.alpha)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\n[grid]\nn_x = 64   # inline\nt_max = 0.5 ; also inline\n")
    assert cfg.grid.n_x == 64 and cfg.grid.t_max == 0.5


def test_bad_value_is_validation_error():
    with pytest.raises(ValidationError) as info:
        parse_config("[grid]\nn_x = 0\n")
    assert any(p.startswith("grid.n_x") for p in info.value.problems)


def test_misspelled_key_suggests():
    with pytest.raises(ParseError) as info:
        parse_config("[grid]\nnx = 64\n")
    msg = info.value.problems[0]
    assert "line 2" in msg and "'n_x'" in msg


def test_all_problems_reported():
    text = "[gird]\nn_x = 4\n[run]\nstop_policy = sometimes\nsave_every = x\nsave_every = 2\nnonsense\n"
    with pytest.raises(ParseError) as info:
        parse_config(text)
    probs = info.value.problems
    assert len(probs) == 5
    assert "did you mean 'grid'" in probs[0]
    with pytest.raises(ValidationError) as info:
        parse_config("[grid]\nn_x = 7\ncfl = 5\n[run]\nstop_policy = sometimes\n[data]\nfamily = file\n")
    paths = [p.split(":")[0] for p in info.value.problems]
    assert {"grid.n_x", "grid.cfl", "run.stop_policy", "data.path"} <= set(paths)


def test_polynomial_needs_interval():
    with pytest.raises(ValidationError):
        parse_config("[model]\nname = polynomial\ncoeffs = 1, 0, 0\n")
    cfg = parse_config("[model]\nname = polynomial\ncoeffs = -0.3333333333333333, 0, 1, 0\nalpha = -1\nbeta = 1\n")
    assert cfg.model.coeffs == ("-0.3333333333333333", "0", "1", "0")


def test_parse_mn():
    assert parse_mn("2:-1") == (2, -1)
    with pytest.raises(ValidationError):
        parse_config("[hamiltonian]\norbits = 0:1\n")


@pytest.mark.parametrize("sc", [s.name for s in HYPERBOLIC_SUITE])
def test_scenario_configs_parse(sc):
    cfg = parse_config(scenario_config(sc))
    assert cfg.grid.t_max == 20.0
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


def test_replace_is_validated():
    cfg = RunConfig().replace("grid.n_x", "128")
    assert cfg.grid.n_x == 128
    with pytest.raises(ValidationError):
        cfg.replace("grid.n_x", "3")


@settings(max_examples=50, deadline=None)
@given(n=st.integers(4, 4096).map(lambda k: 2 * k),
       t_max=st.floats(1e-3, 1e3, allow_nan=False),
       amp=st.floats(0, 10, allow_nan=False),
       flt=st.booleans(),
       policy=st.sampled_from(["continue", "stop-on-mixed", "stop-on-elliptic"]),
       orbits=st.lists(st.tuples(st.integers(1, 5), st.integers(-5, 5)), min_size=1, max_size=4))
def test_text_round_trip(n, t_max, amp, flt, policy, orbits):
    cfg = RunConfig()
    for key, val in [("grid.n_x", str(n)), ("grid.t_max", repr(t_max)), ("data.u_amp", repr(amp)),
                     ("grid.filter", str(flt)), ("run.stop_policy", policy),
                     ("hamiltonian.orbits", ", ".join(f"{m}:{k}" for m, k in orbits))]:
        cfg = cfg.replace(key, val)
    again = parse_config(cfg.to_text())
    assert again == cfg
    assert RunConfig.from_dict(again.to_dict()) == cfg
