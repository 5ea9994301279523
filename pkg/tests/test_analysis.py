import json

import pytest
from hypothesis import given, settings, strategies as st

from discoverability.analysis import (
    CERTIFIED,
    DISCOVERABLE,
    INCONCLUSIVE,
    AnalysisConfig,
    analyze,
    compose_verdict,
)
from discoverability.core import ValidationError
from discoverability.report import dumps, report


@pytest.fixture(scope="module")
def sho_verdict():
    return analyze(AnalysisConfig(system="sho"))


@pytest.fixture(scope="module")
def spiral_verdict():
    return analyze(AnalysisConfig(system="spiral", x0=((1.0, 0.0),)))


def test_sho_is_certified(sho_verdict):
    assert sho_verdict.overall == CERTIFIED
    assert sho_verdict.analytic["first_integral"]["found"]
    assert any("first integral" in r for r in sho_verdict.reasons)


def test_spiral_is_evidence(spiral_verdict):
    v = spiral_verdict
    assert v.overall == DISCOVERABLE
    assert v.c0["verdict"] == "non-dense"
    assert v.analytic["vanishing"]["n_certificates"] == 0
    assert not v.analytic["first_integral"]["found"]


def test_c0_class_skips_analytic_searches():
    v = analyze(AnalysisConfig(system="sho", function_class="c0"))
    assert v.analytic is None
    assert v.overall == INCONCLUSIVE


def test_report_is_bitwise_deterministic(tmp_path, spiral_verdict):
    again = analyze(AnalysisConfig.from_dict(spiral_verdict.parameters))
    a = report(spiral_verdict, tmp_path / "a")
    b = report(again, tmp_path / "b")
    assert [p.name for p in a] == [p.name for p in b]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes(), pa.name
    names = {p.name for p in a}
    assert {"report.json", "coverage.csv", "phase_portrait_0.csv"} <= names
    assert (tmp_path / "a" / "coverage.csv").read_text().splitlines()[0] == "eps,fraction"
    data = json.loads((tmp_path / "a" / "report.json").read_text())
    assert data["overall"] == DISCOVERABLE and data["parameters"]["seed"] == 0


def test_config_roundtrip():
    cfg = AnalysisConfig(system="lorenz", degree=3, laws=())
    back = AnalysisConfig.from_dict(json.loads(dumps(cfg.to_dict())))
    assert back.to_dict() == cfg.to_dict()
    assert cfg.resolved_integrator().t_burn == 100.0
    assert AnalysisConfig(system="sho").resolved_integrator().t_burn == 0.0


@pytest.mark.parametrize("kwargs", [
    {},
    {"system": "sho", "function_class": "smooth"},
    {"system": "sho", "function_class": "c0", "laws": ({"law": "sho-full"},)},
    {"system": "sho", "degree": 0},
    {"system": "sho", "eps_fractions": (0.1, 0.2, 0.05)},
    {"system": "no-such-system"},
])
def test_config_validation(kwargs):
    with pytest.raises(ValidationError):
        AnalysisConfig.from_dict(kwargs)


def test_unknown_config_keys():
    with pytest.raises(ValidationError, match="unknown"):
        AnalysisConfig.from_dict({"system": "sho", "colour": "red"})


def test_laws_reported_not_folded(sho_verdict):
    v = analyze(AnalysisConfig.from_dict({"system": "sho", "laws": [{"law": "sho-full"}]}))
    assert v.analytic["conservation"][0]["hessian"]["verdict"] == "uniqueness-evidence"
    assert v.overall == sho_verdict.overall


def _blocks(fi, n_verified, n_certs, dim_ok, dense):
    c0 = {"verdict": "dense-evidence" if dense else "non-dense"}
    crit = {"verdict": "uniqueness-evidence" if dim_ok else "inconclusive", "method": "correlation",
            "value": 2.5, "threshold": 2, "margin": 0.1}
    analytic = {
        "first_integral": {"found": fi, "degree": 4, "canonical": "x^2"},
        "vanishing": {"n_verified": n_verified, "n_certificates": n_certs, "degree": 4},
        "dimension": {"criterion": crit},
    }
    return c0, analytic


@settings(max_examples=60, deadline=None)
@given(st.booleans(), st.integers(0, 2), st.integers(0, 3), st.booleans(), st.booleans())
def test_verdict_precedence(fi, n_verified, n_certs, dim_ok, dense):
    n_certs = max(n_certs, n_verified)
    c0, analytic = _blocks(fi, n_verified, n_certs, dim_ok, dense)
    overall, reasons = compose_verdict("analytic", c0, analytic)
    assert reasons
    if fi or n_verified:
        assert overall == CERTIFIED
        assert len(reasons) == int(fi) + int(n_verified > 0)
    elif dim_ok or n_certs == 0:
        assert overall == DISCOVERABLE
    else:
        assert overall == INCONCLUSIVE
    overall_c0, _ = compose_verdict("c0", c0, None)
    assert overall_c0 == (DISCOVERABLE if dense else INCONCLUSIVE)
