import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discoverability.polynomial import MonomialBasis, Polynomial

from oracles import graded_lex_exponents, monomials


def test_basis_d2_D2_order():
    b = MonomialBasis(2, 2)
    assert [tuple(a) for a in b.exponents] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert b.labels(["x", "y"]) == ["1", "x", "y", "x^2", "x*y", "y^2"]


@given(st.integers(1, 4), st.integers(0, 5))
def test_basis_matches_bruteforce(d, D):
    b = MonomialBasis(d, D)
    assert len(b) == math.comb(d + D, D)
    assert [tuple(a) for a in b.exponents] == graded_lex_exponents(d, D)
    assert tuple(b.exponents[0]) == (0,) * d


def test_basis_rejects_bad_args():
    with pytest.raises(ValueError):
        MonomialBasis(0, 2)
    with pytest.raises(ValueError):
        MonomialBasis(2, -1)


def test_evaluate_matches_oracle(rng):
    b = MonomialBasis(3, 3)
    pts = rng.uniform(-1, 1, (20, 3))
    np.testing.assert_allclose(b.evaluate(pts), monomials(pts, [tuple(a) for a in b.exponents]), rtol=1e-13)


def test_evaluate_derivative_matches_polynomial_derivative(rng):
    b = MonomialBasis(2, 4)
    coeffs = rng.normal(size=len(b))
    p = Polynomial.from_vector(b, coeffs)
    pts = rng.uniform(-1, 1, (15, 2))
    for axis in range(2):
        deriv = [0, 0]
        deriv[axis] = 1
        np.testing.assert_allclose(b.evaluate(pts, deriv) @ coeffs, p.derivative(axis)(pts), atol=1e-12)


def test_arithmetic_and_identity():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    g = x ** 2 + y ** 2 - 1.0
    assert g.degree == 2
    assert g.coefficient((0, 0)) == -1.0
    # y + y (x^2 + y^2 - 1) = y (x^2 + y^2)
    assert y + y * g == y * (x ** 2 + y ** 2)
    assert (g - g).is_zero()


poly_terms = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3)), st.floats(-5, 5, allow_nan=False), max_size=6
)


@settings(max_examples=50, deadline=None)
@given(poly_terms, poly_terms, st.floats(-3, 3), st.floats(-3, 3))
def test_evaluation_is_a_ring_homomorphism(t1, t2, a, b):
    p, q = Polynomial(2, t1), Polynomial(2, t2)
    u = np.array([[a, b]])
    np.testing.assert_allclose((p + q)(u), p(u) + q(u), atol=1e-9, rtol=1e-9)
    np.testing.assert_allclose((p * q)(u), p(u) * q(u), atol=1e-8, rtol=1e-9)


@settings(max_examples=50, deadline=None)
@given(poly_terms, st.floats(0.1, 3), st.floats(-2, 2), st.floats(-1, 1), st.floats(-1, 1))
def test_substitute_affine(terms, scale, shift, a, b):
    p = Polynomial(2, terms)
    q = p.substitute_affine([scale, 1 / scale], [shift, -shift])
    u = np.array([[a, b]])
    v = np.array([[scale * a + shift, b / scale - shift]])
    np.testing.assert_allclose(q(u), p(v), atol=1e-8, rtol=1e-8)


def test_vector_roundtrip(rng):
    b = MonomialBasis(3, 2)
    c = rng.normal(size=len(b))
    np.testing.assert_array_equal(Polynomial.from_vector(b, c).to_vector(b), c)
    with pytest.raises(ValueError):
        (Polynomial.variable(3, 0) ** 3).to_vector(b)
