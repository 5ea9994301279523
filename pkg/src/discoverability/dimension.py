"""Fractal dimension estimates and the analytic-uniqueness dimension criterion.

Both estimators fit a straight line in log-log coordinates over the
contiguous window of scales with the best coefficient of determination.
Points are rescaled per axis into ``[-1, 1]^d`` first; all scales are in
those units.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _backend
from .core import NumericalError, Rescaling, ValidationError, as_points

log = logging.getLogger(__name__)

MIN_POINTS = 10_000


@dataclass(frozen=True)
class DimensionEstimate:
    method: str
    value: float
    ci_halfwidth: float
    fit_window: tuple[float, float]
    r2: float
    n_points: int
    scales: tuple[float, ...] = ()
    counts: tuple[float, ...] = ()
    used: tuple[bool, ...] = ()
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = asdict(self)
        out["fit_window"] = list(self.fit_window)
        for key in ("scales", "counts", "used", "warnings"):
            out[key] = list(out[key])
        return out

    def table(self) -> list[tuple[float, float]]:
        return list(zip(self.scales, self.counts))


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r2: float
    stderr: float
    start: int
    stop: int  # exclusive


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    n = x.shape[0]
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    sxy = float(np.sum((x - xm) * (y - ym)))
    syy = float(np.sum((y - ym) ** 2))
    slope = sxy / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ssr = float(np.sum(resid ** 2))
    r2 = 1.0 - ssr / syy if syy > 0 else 1.0
    stderr = math.sqrt(ssr / (n - 2) / sxx) if n > 2 else math.inf
    return slope, intercept, min(max(r2, 0.0), 1.0), stderr


def best_window_fit(x, y, min_len: int = 4, mask=None) -> LineFit:
    """Least-squares line over the contiguous window with the highest R^2.

    `mask` marks usable levels; windows never span an unusable level.
    Ties go to the longer window, then to the earlier one.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    mask = np.ones(x.shape[0], bool) if mask is None else np.asarray(mask, bool)
    best: LineFit | None = None
    n = x.shape[0]
    for start in range(n):
        for stop in range(start + min_len, n + 1):
            if not mask[start:stop].all():
                break
            slope, intercept, r2, se = _linfit(x[start:stop], y[start:stop])
            cand = LineFit(slope, intercept, r2, se, start, stop)
            if (best is None or r2 > best.r2 + 1e-12
                    or (abs(r2 - best.r2) <= 1e-12 and stop - start > best.stop - best.start)):
                best = cand
    if best is None:
        raise NumericalError(f"no window of >= {min_len} usable scales to fit")
    return best


def _ci(fit: LineFit) -> float:
    # two-sided 95% Student-t quantiles for small dof
    dof = fit.stop - fit.start - 2
    tq = {1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447, 7: 2.365, 8: 2.306}.get(dof, 2.0)
    return float(tq * fit.stderr)


def default_eps_schedule(levels: int = 8, largest: float = 0.5) -> np.ndarray:
    """Halving schedule in rescaled units: 0.5, 0.25, ..."""
    return largest * 0.5 ** np.arange(levels)


def box_counts(scaled: np.ndarray, eps_schedule) -> np.ndarray:
    """Occupied cells of a grid anchored at -1 for each edge length."""
    counts = []
    for eps in eps_schedule:
        cells = max(1, math.ceil(2.0 / eps - 1e-9))
        idx = np.clip(np.floor((scaled + 1.0) / eps).astype(np.int64), 0, cells - 1)
        key = np.zeros(idx.shape[0], dtype=np.int64)
        for j in range(idx.shape[1]):
            key = key * cells + idx[:, j]
        counts.append(np.unique(key).shape[0])
    return np.array(counts, dtype=float)


def _prepare(points, min_points: int) -> tuple[np.ndarray, list[str]]:
    pts = as_points(points)
    warnings: list[str] = []
    if pts.shape[0] < min_points:
        raise ValidationError(f"need >= {min_points} points, got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("points contain non-finite values")
    return pts, warnings


def box_counting_dimension(points, eps_schedule=None, min_points: int = MIN_POINTS,
                           min_occupancy: float = 10.0, min_window: int = 4) -> DimensionEstimate:
    """Box-counting dimension: slope of log N(eps) against log(1/eps).

    Levels where the mean number of points per occupied box falls below
    `min_occupancy` are reported but left out of the fit (the count there
    reflects sampling, not geometry).
    """
    pts, warnings = _prepare(points, min_points)
    n = pts.shape[0]
    eps = default_eps_schedule() if eps_schedule is None else np.asarray(eps_schedule, float)
    _check_schedule(eps, 6)
    if np.all(pts == pts[0]):
        warnings.append("degenerate point set: all points identical")
        log.warning("box_counting_dimension: degenerate point set")
        return DimensionEstimate("box_counting", 0.0, 0.0, (float(eps[-1]), float(eps[0])), 1.0, n,
                                 tuple(map(float, eps)), tuple([1.0] * eps.size),
                                 tuple([False] * eps.size), tuple(warnings))
    scaled = Rescaling.fit(pts).forward(pts)
    counts = box_counts(scaled, eps)
    usable = n / counts >= min_occupancy
    if usable.sum() < min_window:
        warnings.append("too few well-sampled levels; fitting all levels")
        usable[:] = True
    fit = best_window_fit(np.log(1.0 / eps), np.log(counts), min_window, usable)
    return DimensionEstimate(
        "box_counting", max(0.0, fit.slope), _ci(fit),
        (float(eps[fit.stop - 1]), float(eps[fit.start])), fit.r2, n,
        tuple(map(float, eps)), tuple(map(float, counts)), tuple(map(bool, usable)), tuple(warnings),
    )


def default_r_schedule(levels: int = 16, smallest: float = 2.0 ** -9, largest: float = 0.5) -> np.ndarray:
    return np.geomspace(smallest, largest, levels)


def correlation_dimension(points, r_schedule=None, max_points: int = 20_000, seed: int = 0,
                          min_points: int = MIN_POINTS, min_pairs: int = 1000,
                          max_fraction: float = 0.05, min_window: int = 4,
                          backend: str | None = None) -> DimensionEstimate:
    """Correlation dimension: slope of log C(r) against log r.

    ``C(r)`` is the fraction of distinct pairs within Euclidean distance
    ``r``, computed on a random subsample of at most `max_points` points.
    Radii with fewer than `min_pairs` pairs or with ``C(r) > max_fraction``
    are excluded from the fit.
    """
    pts, warnings = _prepare(points, min_points)
    if np.all(pts == pts[0]):
        raise NumericalError("correlation dimension undefined: all points identical")
    r = default_r_schedule() if r_schedule is None else np.sort(np.asarray(r_schedule, float))
    _check_schedule(r[::-1], 6)
    scaled = Rescaling.fit(pts).forward(pts)
    if scaled.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        scaled = scaled[np.sort(rng.choice(scaled.shape[0], max_points, replace=False))]
    m = scaled.shape[0]
    pairs = _backend.pair_counts(scaled, r, backend=backend).astype(float)
    total = m * (m - 1) / 2
    frac = pairs / total
    usable = (pairs >= min_pairs) & (frac <= max_fraction)
    if usable.sum() < min_window:
        warnings.append("too few usable radii; fitting all radii with nonzero counts")
        usable = pairs > 0
    logc = np.log(np.where(pairs > 0, frac, np.nan))
    fit = best_window_fit(np.log(r), logc, min_window, usable)
    return DimensionEstimate(
        "correlation", max(0.0, fit.slope), _ci(fit),
        (float(r[fit.start]), float(r[fit.stop - 1])), fit.r2, int(pts.shape[0]),
        tuple(map(float, r)), tuple(map(float, frac)), tuple(map(bool, usable)), tuple(warnings),
    )


def _check_schedule(desc: np.ndarray, min_levels: int) -> None:
    if desc.ndim != 1 or desc.shape[0] < min_levels:
        raise ValidationError(f"scale schedule needs >= {min_levels} levels")
    if not np.all(desc > 0) or not np.all(np.diff(desc) < 0):
        raise ValidationError("scale schedule must be positive and strictly monotone")
    ratios = desc[1:] / desc[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-6):
        raise ValidationError("scale schedule must be geometric")


@dataclass(frozen=True)
class CriterionVerdict:
    verdict: str  # "uniqueness-evidence" | "inconclusive"
    value: float
    margin: float
    threshold: float
    method: str
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["notes"] = list(self.notes)
        return out


def dimension_criterion(est: DimensionEstimate, d: int, margin: float | None = None) -> CriterionVerdict:
    """Uniqueness evidence iff ``value - margin > d - 1``.

    Box and correlation dimensions approximate (box: bound from above) the
    Hausdorff dimension, so passing is evidence, never a certificate.
    """
    margin = 2.0 * est.ci_halfwidth if margin is None else float(margin)
    if margin < 0:
        raise ValidationError("margin must be >= 0")
    threshold = d - 1
    verdict = "uniqueness-evidence" if est.value - margin > threshold else "inconclusive"
    notes = (
        f"{est.method} dimension stands in for Hausdorff dimension; "
        "numerical evidence only, the Hausdorff bound is not certified",
    )
    return CriterionVerdict(verdict, est.value, margin, threshold, est.method, notes)
