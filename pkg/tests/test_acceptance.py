"""End-to-end acceptance checks, one test per criterion at its stated tolerance."""
import pytest

from psystem import acceptance as acc

_cache = {}


def _blowup():
    if "blowup" not in _cache:
        _cache["blowup"] = acc.blowup_demonstration()
    return _cache["blowup"]


CHECKS = {
    1: acc.exact_family_residual,
    2: acc.riemann_round_trip,
    3: acc.riccati_equivalence,
    4: lambda: _blowup()[0],
    5: lambda: _blowup()[1],
    6: acc.genuine_nonlinearity_check,
    7: acc.energy_concavity,
    8: acc.f_conservation,
    9: acc.reduction_identity,
    10: acc.self_convergence,
    11: acc.determinism,
}


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, capsys):
    result = CHECKS[number]()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.number == number
    assert result.passed, result.line()
