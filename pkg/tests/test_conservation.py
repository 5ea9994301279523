import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discoverability import catalog
from discoverability.conservation import (
    EVIDENCE,
    GATE_FAILED,
    INCONCLUSIVE,
    MARGINAL,
    TooFewLocalSamplesError,
    hessian_test,
    kernel_inclusion_test,
    max_principal_angle,
    symmetry_class,
    tangent_space,
)
from discoverability.core import PolynomialField, PreconditionError, ValidationError
from discoverability.integrate import IntegratorConfig, flow
from discoverability.polynomial import MonomialBasis

from oracles import central_hessian_v


def ring(r, n=100):
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.c_[r * np.cos(th), r * np.sin(th)]


def test_hessian_sho_full_det_closed_form():
    H, F = catalog.get_law("sho-full"), catalog.get("sho")
    rng = np.random.default_rng(0)
    pts = rng.uniform(-2, 2, (100, 2))
    rep = hessian_test(H, F, pts)
    dets = np.asarray(rep.dets)
    np.testing.assert_allclose(dets, 4 * np.sum(pts ** 2, axis=1) ** 2, rtol=1e-10)
    assert rep.verdict == EVIDENCE
    assert rep.witness_det == pytest.approx(dets.max())
    assert rep.grad_norm <= 1e-8


def test_hessian_matches_finite_differences():
    H, F = catalog.get_law("sho-full"), catalog.get("sho")
    pts = ring(1.3, 10)
    ours = H.hess_v(F(pts), pts)
    for i, p in enumerate(pts):
        np.testing.assert_allclose(ours[i], central_hessian_v(H.value, F(p), p), atol=1e-5)


@pytest.mark.parametrize("r, verdict", [(1.0, EVIDENCE), (0.005, MARGINAL), (1e-4, INCONCLUSIVE)])
def test_hessian_verdict_bands(r, verdict):
    rep = hessian_test(catalog.get_law("sho-full"), catalog.get("sho"), ring(r))
    assert rep.verdict == verdict
    assert rep.max_abs_det == pytest.approx(4 * r ** 4, rel=1e-8)


def test_hessian_precondition():
    with pytest.raises(PreconditionError, match="not stationary"):
        hessian_test(catalog.get_law("sho-full"), catalog.get("spiral"), ring(1.0))
    with pytest.raises(ValidationError):
        hessian_test(catalog.get_law("sho-full"), catalog.get("lorenz"), np.ones((3, 3)))


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("sid, cls", [
    ("sho", "skew"), ("sink", "symmetric"), ("gradient-quadratic", "symmetric"),
    ("lorenz", "neither"), ("nilpotent-f1", "neither"), ("bistable", "symmetric"),
])
def test_symmetry_classes(sid, cls, seed):
    c = symmetry_class(catalog.get(sid), seed=seed)
    assert c.cls == cls
    assert c.passes == (cls != "neither")


def test_symmetry_probe_floor():
    with pytest.raises(ValidationError):
        symmetry_class(catalog.get("sho"), probes=5)


def test_tangent_space_and_angles():
    rng = np.random.default_rng(1)
    line = np.c_[np.linspace(0, 1, 50), np.zeros(50)] + rng.normal(scale=1e-6, size=(50, 2))
    T = tangent_space(line)
    assert T.shape == (2, 1) and abs(T[0, 0]) == pytest.approx(1.0)
    e1, e2 = np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])
    assert max_principal_angle(e1, T) < 1e-5
    assert max_principal_angle(e2, T) == pytest.approx(np.pi / 2)
    assert max_principal_angle(np.zeros((2, 0)), T) == 0.0
    assert max_principal_angle(np.eye(2), T) == pytest.approx(np.pi / 2)


def test_kernel_inclusion_sho_radial(sho_long_circle):
    rep = kernel_inclusion_test(catalog.get_law("sho-radial"), catalog.get("sho"), sho_long_circle, [1.0, 0.0])
    assert rep.ker_dim == 1 and rep.tangent_dim == 1
    assert rep.max_principal_angle <= 1e-3 and rep.inclusion
    assert rep.gate.cls == "skew"
    assert rep.verdict == EVIDENCE


def test_kernel_inclusion_nilpotent_gate_fails():
    F = catalog.get("nilpotent-f1")
    traj = flow(F, [-1.0, 1.0], IntegratorConfig(t_end=2.0))
    rep = kernel_inclusion_test(catalog.get_law("nilpotent"), F, traj, [0.0, 1.0])
    assert rep.inclusion
    assert rep.verdict == GATE_FAILED
    assert rep.notes


def test_kernel_inclusion_preconditions(sho_long_circle):
    H, F = catalog.get_law("sho-radial"), catalog.get("sho")
    with pytest.raises(PreconditionError):
        kernel_inclusion_test(H, F, sho_long_circle, [2.0, 0.0])
    with pytest.raises(TooFewLocalSamplesError):
        kernel_inclusion_test(H, F, sho_long_circle, [1.0, 0.0], r=1e-4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_gate_soundness(seed):
    # a generic field is neither symmetric nor skew, so kernel inclusion never certifies it
    rng = np.random.default_rng(seed)
    basis = MonomialBasis(2, 2)
    coeffs = rng.normal(size=(2, len(basis)))
    coeffs[0, 2] += 1.0
    F = PolynomialField(basis, coeffs)
    traj = flow(catalog.get("sho"), [1.0, 0.0], IntegratorConfig(t_end=7.0))
    rep = kernel_inclusion_test(catalog.get_law("sho-radial"), F, traj, [1.0, 0.0])
    assert rep.gate.cls == "neither"
    assert rep.verdict == GATE_FAILED
