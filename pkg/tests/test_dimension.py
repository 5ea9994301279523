import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discoverability.core import NumericalError, Rescaling, ValidationError
from discoverability.dimension import (
    DimensionEstimate,
    best_window_fit,
    box_counting_dimension,
    box_counts,
    correlation_dimension,
    default_eps_schedule,
    dimension_criterion,
)

from oracles import box_count


def circle(n, seed=0):
    th = np.random.default_rng(seed).uniform(0, 2 * np.pi, n)
    return np.c_[np.cos(th), np.sin(th)]


@pytest.mark.parametrize("method", [box_counting_dimension, correlation_dimension])
def test_circle(method):
    est = method(circle(100_000))
    assert abs(est.value - 1.0) <= 0.05


@pytest.mark.parametrize("method", [box_counting_dimension, correlation_dimension])
def test_uniform_square(method):
    pts = np.random.default_rng(1).random((200_000, 2))
    assert abs(method(pts).value - 2.0) <= 0.05


def test_uniform_cube_correlation():
    # edge effects bias the correlation sum slightly low in 3-D
    pts = np.random.default_rng(2).random((200_000, 3))
    assert abs(correlation_dimension(pts).value - 3.0) <= 0.05


def test_box_counts_match_oracle(rng):
    pts = Rescaling.fit(rng.normal(size=(5000, 2))).forward(rng.normal(size=(5000, 2)))
    pts = np.clip(pts, -1, 1)
    eps = default_eps_schedule(6)
    np.testing.assert_array_equal(box_counts(pts, eps), [box_count(pts, e) for e in eps])


def test_degenerate_point_set():
    pts = np.ones((20_000, 2))
    est = box_counting_dimension(pts)
    assert est.value == 0.0 and est.warnings
    with pytest.raises(NumericalError):
        correlation_dimension(pts)


def test_too_few_points_and_bad_schedule():
    with pytest.raises(ValidationError):
        box_counting_dimension(circle(100))
    with pytest.raises(ValidationError):
        box_counting_dimension(circle(20_000), eps_schedule=[0.5, 0.25, 0.125])
    with pytest.raises(ValidationError):
        box_counting_dimension(circle(20_000), eps_schedule=[0.5, 0.3, 0.25, 0.1, 0.05, 0.01])


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-5, 5), st.integers(0, 2**31))
def test_best_window_recovers_exact_line(slope, intercept, seed):
    x = np.linspace(0, 5, 9)
    y = intercept + slope * x
    noise = np.random.default_rng(seed).normal(scale=1.0, size=9)
    noise[2:7] = 0.0
    fit = best_window_fit(x, y + noise, min_len=4)
    assert fit.stop - fit.start >= 4
    if fit.start >= 2 and fit.stop <= 7:
        assert fit.slope == pytest.approx(slope, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 4), st.floats(0, 0.5), st.integers(1, 4))
def test_criterion_threshold(value, ci, d):
    est = DimensionEstimate("box_counting", value, ci, (0.1, 0.5), 0.99, 10_000)
    verdict = dimension_criterion(est, d)
    assert verdict.threshold == d - 1
    assert (verdict.verdict == "uniqueness-evidence") == (value - 2 * ci > d - 1)
    assert verdict.verdict in ("uniqueness-evidence", "inconclusive")
    assert "evidence" in verdict.notes[0]


def test_scale_invariance(rng):
    pts = circle(50_000)
    a = box_counting_dimension(pts).value
    b = box_counting_dimension(pts * 37.0 + 5.0).value
    assert a == pytest.approx(b, abs=1e-12)
    assert math.isfinite(a)
