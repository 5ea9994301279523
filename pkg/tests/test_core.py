import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discoverability import catalog
from discoverability.core import (
    DimensionMismatchError,
    Domain,
    PolynomialField,
    Rescaling,
    Trajectory,
    ValidationError,
    eval_field,
    eval_jacobian,
    load_field_json,
)
from discoverability.polynomial import MonomialBasis, Polynomial

from oracles import central_jacobian


def test_eval_field_examples():
    np.testing.assert_array_equal(eval_field(catalog.get("sho"), [1, 0]), [0, -1])
    np.testing.assert_array_equal(eval_field(catalog.get("sho-cubic"), [1, 0]), [0, -1])
    for sid in catalog.ids():
        e = catalog.entry(sid)
        if e.fixed_point is None:
            continue
        np.testing.assert_allclose(eval_field(catalog.get(sid), e.fixed_point), 0.0, atol=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        eval_field(catalog.get("sho"), [1, 0, 0])
    with pytest.raises(DimensionMismatchError):
        eval_jacobian(catalog.get("lorenz"), [1, 0])


def test_jacobian_examples():
    np.testing.assert_array_equal(eval_jacobian(catalog.get("sho"), [0.3, -2]), [[0, 1], [-1, 0]])
    np.testing.assert_array_equal(eval_jacobian(catalog.get("nilpotent-f1"), [0.3, -2]), [[0, 1], [0, 0]])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_polynomial_jacobian_vs_finite_differences(seed):
    rng = np.random.default_rng(seed)
    b = MonomialBasis(3, 3)
    F = PolynomialField(b, rng.normal(size=(3, len(b))))
    u = rng.uniform(-1, 1, 3)
    J = eval_jacobian(F, u)
    fd = central_jacobian(F, u)
    assert np.linalg.norm(J - fd) <= 1e-6 * max(1.0, np.linalg.norm(J))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(-3, 3), st.floats(-3, 3))
def test_polynomial_field_linear_in_coeffs(seed, a, b):
    rng = np.random.default_rng(seed)
    basis = MonomialBasis(2, 3)
    c1, c2 = rng.normal(size=(2, 2, len(basis)))
    u = rng.uniform(-1, 1, (5, 2))
    lhs = PolynomialField(basis, a * c1 + b * c2)(u)
    rhs = a * PolynomialField(basis, c1)(u) + b * PolynomialField(basis, c2)(u)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)) * 50)


def test_field_json_roundtrip(tmp_path):
    F = catalog.get("lorenz").as_polynomial()
    path = tmp_path / "f.json"
    import json

    path.write_text(json.dumps(F.to_json()))
    G = load_field_json(path)
    u = np.random.default_rng(0).normal(size=(10, 3))
    np.testing.assert_array_equal(F(u), G(u))
    data = F.to_json()
    assert set(data) >= {"dim", "max_degree", "coeffs"}
    data["coeffs"] = data["coeffs"][:2]
    with pytest.raises(ValidationError):
        PolynomialField.from_json(data)


def test_domain_validation_and_parse():
    d = Domain.parse("-1,1;0,2")
    np.testing.assert_array_equal(d.lower, [-1, 0])
    assert d.contains([[0, 1]]).all()
    assert not d.contains([[1, 1]], strict=True).any()
    with pytest.raises(ValidationError):
        Domain(np.array([1.0]), np.array([0.0]))


def test_rescaling_roundtrip_and_pull_back(rng):
    pts = rng.uniform([-3, 10], [5, 12], (100, 2))
    r = Rescaling.fit(pts)
    s = r.forward(pts)
    assert s.min() >= -1 - 1e-12 and s.max() <= 1 + 1e-12
    np.testing.assert_allclose(r.inverse(s), pts)
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    g_scaled = x ** 2 + x * y - 0.5
    np.testing.assert_allclose(r.pull_back(g_scaled)(pts), g_scaled(s), atol=1e-10)


def test_trajectory_invariants(tmp_path):
    with pytest.raises(ValidationError):
        Trajectory([0.0], [[1.0, 2.0]])
    with pytest.raises(ValidationError):
        Trajectory([0.0, 0.0], [[1.0, 2.0], [1.0, 2.0]])
    with pytest.raises(ValidationError):
        Trajectory([0.0, 1.0], [[1.0, np.nan], [1.0, 2.0]])
    t = Trajectory([0.0, 0.5, 1.0], [[1, 2], [3, 4], [5, 6]])
    np.testing.assert_array_equal(t.x0, [1, 2])
    path = tmp_path / "t.csv"
    t.to_csv(path)
    assert path.read_text().splitlines()[0] == "t,x1,x2"
    back = Trajectory.from_csv(path)
    np.testing.assert_array_equal(back.states, t.states)
    path.write_text("time,a,b\n0,1,2\n1,2,3\n")
    with pytest.raises(ValidationError):
        Trajectory.from_csv(path)
