"""Polynomial certificates against analytic uniqueness.

Two searches, both reduced to the small end of a singular value
decomposition on rescaled data:

* :func:`find_vanishing` looks for non-zero polynomials that vanish on the
  samples.  Each one turns into an alternative field ``F + g W`` that fits
  the same trajectory (:func:`alternative_field`).
* :func:`find_first_integral` looks for a non-constant polynomial ``G``
  with ``grad G . F = 0``; its existence rules out analytic
  discoverability from any single trajectory.

An empty result only says "nothing up to degree D".
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    NumericalError,
    PolynomialField,
    Rescaling,
    ValidationError,
    VectorField,
    as_points,
    as_state,
)
from .integrate import EscapeError, IntegratorConfig, flow
from .polynomial import MonomialBasis, Polynomial

log = logging.getLogger(__name__)


class UnderdeterminedError(ValidationError):
    pass


class DegreeOverflowError(ValidationError):
    pass


class DegenerateRowsError(NumericalError):
    pass


def monomial_matrix(points, basis: MonomialBasis) -> np.ndarray:
    """``M[i, a] = u_i ** alpha_a`` for (already rescaled) points."""
    return basis.evaluate(as_points(points, basis.dim))


@dataclass(frozen=True, eq=False)
class VanishingCertificate:
    """Unit-norm coefficients (rescaled coordinates) of a polynomial vanishing on samples."""

    basis: MonomialBasis
    coeffs: np.ndarray
    residual: float
    sigma_ratio: float
    rescaling: Rescaling
    tol: float
    n_samples: int
    points: np.ndarray | None = field(default=None, repr=False)

    @property
    def degree(self) -> int:
        return self.basis.max_degree

    def scaled_polynomial(self) -> Polynomial:
        return Polynomial.from_vector(self.basis, self.coeffs)

    def polynomial(self) -> Polynomial:
        """The same polynomial expressed in original coordinates."""
        return self.rescaling.pull_back(self.scaled_polynomial())

    def __call__(self, points) -> np.ndarray:
        return monomial_matrix(self.rescaling.forward(as_points(points, self.basis.dim)), self.basis) @ self.coeffs

    def canonical(self, decimals: int | None = None) -> Polynomial:
        """Original-coordinate polynomial scaled to max |coefficient| = 1.

        Coefficients below 1e-12 are dropped and the sign makes the first
        highest-degree term positive.  With `decimals`, coefficients are
        rounded (clears integration noise from integer-coefficient
        relations such as ``x^2 + y^2 - 1``).
        """
        return canonical_polynomial(self.polynomial(), decimals)

    def to_dict(self) -> dict:
        return {
            "dim": self.basis.dim,
            "degree": self.degree,
            "exponents": self.basis.exponents.tolist(),
            "coeffs": self.coeffs.tolist(),
            "residual": self.residual,
            "sigma_ratio": self.sigma_ratio,
            "tol": self.tol,
            "n_samples": self.n_samples,
            "rescaling": self.rescaling.to_dict(),
            "original_coordinates": {
                "exponents": [list(a) for a in sorted(self.canonical().terms)],
                "coeffs": [self.canonical().terms[a] for a in sorted(self.canonical().terms)],
            },
        }

    @classmethod
    def from_dict(cls, data) -> "VanishingCertificate":
        basis = MonomialBasis(int(data["dim"]), int(data["degree"]))
        if [list(r) for r in basis.exponents.tolist()] != [list(r) for r in data["exponents"]]:
            raise ValidationError("certificate exponents are not in graded-lex order")
        return cls(basis, np.asarray(data["coeffs"], float), float(data["residual"]),
                   float(data["sigma_ratio"]), Rescaling.from_dict(data["rescaling"]),
                   float(data["tol"]), int(data["n_samples"]))


def canonical_polynomial(poly: Polynomial, decimals: int | None = None) -> Polynomial:
    if poly.is_zero():
        return poly
    top = max(poly.degree, 0)
    lead = sorted((a for a in poly.terms if sum(a) == top), reverse=True)[0]
    scale = poly.max_abs_coefficient() * (1.0 if poly.terms[lead] > 0 else -1.0)
    out = (poly * (1.0 / scale)).chop(1e-12)
    if decimals is not None:
        out = Polynomial(out.dim, {a: round(c, decimals) for a, c in out.terms.items()})
    return out


def _nonconstant(v: np.ndarray) -> bool:
    return float(np.linalg.norm(v[1:])) > 1e-6


def find_vanishing(points, degree: int, tol: float = 1e-8, rescaling: Rescaling | None = None,
                   keep_points: bool = True) -> list[VanishingCertificate]:
    """Polynomials of degree <= `degree` vanishing on `points`.

    A right singular vector of the monomial matrix qualifies when
    ``sigma / sigma_max <= tol``, it is not a pure constant, and its
    residual ``max_i |g(u_i)|`` recomputed on all samples is at most
    ``tol * sqrt(len(basis))``.
    """
    pts = as_points(points)
    basis = MonomialBasis(pts.shape[1], degree)
    m = len(basis)
    if pts.shape[0] < m:
        raise UnderdeterminedError(f"{pts.shape[0]} samples < {m} monomials at degree {degree}")
    if pts.shape[0] < 2 * m:
        log.warning("find_vanishing: only %d samples for %d monomials", pts.shape[0], m)
    rescaling = rescaling or Rescaling.fit(pts)
    M = monomial_matrix(rescaling.forward(pts), basis)
    _, s, vt = np.linalg.svd(M, full_matrices=False)
    smax = s[0]
    certs = []
    bound = tol * math.sqrt(m)
    for k in range(s.shape[0] - 1, -1, -1):
        ratio = s[k] / smax if smax > 0 else 0.0
        if ratio > tol:
            break
        v = vt[k]
        if not _nonconstant(v):
            continue
        v = _fix_sign(v)
        residual = float(np.max(np.abs(M @ v)))
        if residual <= bound:
            certs.append(VanishingCertificate(basis, v, residual, float(ratio), rescaling, tol,
                                              pts.shape[0], pts if keep_points else None))
    return certs


def _fix_sign(v: np.ndarray) -> np.ndarray:
    """Deterministic sign: largest-magnitude coefficient positive."""
    i = int(np.argmax(np.abs(v)))
    return v if v[i] > 0 else -v


@dataclass(frozen=True, eq=False)
class AlternativeField:
    field: PolynomialField
    g: Polynomial
    max_sample_deviation: float
    sample_bound: float
    probe: np.ndarray
    probe_difference: float

    def to_dict(self) -> dict:
        return {
            "field": self.field.to_json(),
            "g": {"exponents": [list(a) for a in sorted(self.g.terms)],
                  "coeffs": [self.g.terms[a] for a in sorted(self.g.terms)]},
            "max_sample_deviation": self.max_sample_deviation,
            "sample_bound": self.sample_bound,
            "probe": self.probe.tolist(),
            "probe_difference": self.probe_difference,
        }


def _polynomial_field(F: VectorField, what: str) -> PolynomialField:
    poly = F.as_polynomial()
    if poly is None:
        raise ValidationError(f"{what} must be a polynomial field (got {F.field_id})")
    return poly


def alternative_field(F: VectorField, g: VanishingCertificate, W: VectorField, points=None,
                      tol: float | None = None, decimals: int | None = None, max_degree: int = 12,
                      probe=None) -> AlternativeField:
    """``F2 = F + g W``: a second field agreeing with ``F`` wherever ``g = 0``.

    ``g`` is used in canonical form (max |coefficient| = 1).  Checks that
    ``F2`` matches ``F`` on the samples to ``tol * max_i |W(u_i)|`` and
    reports a probe point off the samples where the two differ most.
    """
    tol = g.tol if tol is None else tol
    if g.residual > tol * math.sqrt(len(g.basis)):
        raise ValidationError(f"certificate residual {g.residual:.3g} exceeds tolerance")
    gpoly = g.canonical(decimals)
    if gpoly.is_zero() or gpoly.degree == 0:
        raise ValidationError("g must be a non-constant, non-zero polynomial")
    Fp = _polynomial_field(F, "F")
    Wp = _polynomial_field(W, "W")
    if Fp.dim != Wp.dim or Fp.dim != gpoly.dim:
        raise ValidationError("F, W and g live in different dimensions")
    polys = [f + gpoly * w for f, w in zip(Fp.polynomials(), Wp.polynomials())]
    degree = max(max(p.degree for p in polys), Fp.basis.max_degree)
    if degree > max_degree:
        raise DegreeOverflowError(f"alternative field has degree {degree} > {max_degree}")
    F2 = PolynomialField.from_polynomials(polys, degree, name=f"{F.field_id}+g*W")

    pts = g.points if points is None else as_points(points, F.dim)
    if pts is None:
        raise ValidationError("no sample points to verify the alternative field on")
    deviation = float(np.max(np.linalg.norm(F2(pts) - F(pts), axis=1)))
    w_norm = float(np.max(np.linalg.norm(W(pts), axis=1)))
    bound = tol * w_norm
    if deviation > bound:
        raise NumericalError(
            f"alternative field deviates by {deviation:.3g} on the samples (bound {bound:.3g})"
        )
    if probe is None:
        probe = _default_probe(pts, F, F2)
    probe = as_state(probe, F.dim)
    diff = float(np.linalg.norm(F2(probe) - F(probe)))
    return AlternativeField(F2, gpoly, deviation, bound, probe, diff)


def _default_probe(pts: np.ndarray, F: VectorField, F2: VectorField) -> np.ndarray:
    """Grid point in a 1.5x enlarged bounding box where ``F2 - F`` is largest."""
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    mid, half = (lo + hi) / 2, np.maximum((hi - lo) / 2, 1e-3) * 1.5
    axes = [np.linspace(m - h, m + h, 9 if pts.shape[1] <= 3 else 5) for m, h in zip(mid, half)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, pts.shape[1])
    diff = np.linalg.norm(F2(grid) - F(grid), axis=1)
    return grid[int(np.argmax(diff))]


# ---------------------------------------------------------------------------
# first integrals


@dataclass(frozen=True, eq=False)
class FirstIntegralCertificate:
    """``G`` (unit-norm, rescaled coordinates, no constant term) with ``grad G . F ~ 0``."""

    basis: MonomialBasis
    coeffs: np.ndarray
    residual: float
    cross_validation_drift: float
    rescaling: Rescaling
    tol: float
    n_rows: int
    null_dim: int
    fresh_x0: np.ndarray

    @property
    def degree(self) -> int:
        return self.basis.max_degree

    def scaled_polynomial(self) -> Polynomial:
        return Polynomial.from_vector(self.basis, self.coeffs)

    def polynomial(self) -> Polynomial:
        return self.rescaling.pull_back(self.scaled_polynomial())

    def canonical(self, decimals: int | None = None) -> Polynomial:
        """Original-coordinate G, constant dropped, max |coefficient| = 1."""
        p = self.polynomial()
        p = Polynomial(p.dim, {a: c for a, c in p.terms.items() if sum(a) > 0})
        return canonical_polynomial(p, decimals)

    def __call__(self, points) -> np.ndarray:
        return self.basis.evaluate(self.rescaling.forward(as_points(points, self.basis.dim))) @ self.coeffs

    def to_dict(self) -> dict:
        canon = self.canonical()
        return {
            "dim": self.basis.dim,
            "degree": self.degree,
            "exponents": self.basis.exponents.tolist(),
            "coeffs": self.coeffs.tolist(),
            "residual": self.residual,
            "cross_validation_drift": self.cross_validation_drift,
            "tol": self.tol,
            "n_rows": self.n_rows,
            "null_dim": self.null_dim,
            "fresh_x0": self.fresh_x0.tolist(),
            "rescaling": self.rescaling.to_dict(),
            "original_coordinates": {
                "exponents": [list(a) for a in sorted(canon.terms)],
                "coeffs": [canon.terms[a] for a in sorted(canon.terms)],
            },
        }


@dataclass(frozen=True, eq=False)
class FirstIntegralSearch:
    """Outcome of a first-integral search, including the failed case."""

    certificate: FirstIntegralCertificate | None
    best_residual: float
    best_drift: float
    degree: int
    tol: float
    n_rows: int
    singular_values: np.ndarray

    def to_dict(self) -> dict:
        return {
            "found": self.certificate is not None,
            "degree": self.degree,
            "tol": self.tol,
            "best_residual": self.best_residual,
            "best_drift": self.best_drift,
            "n_rows": self.n_rows,
            "smallest_singular_values": self.singular_values[-5:].tolist(),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "scope": f"polynomial first integrals up to degree {self.degree}",
        }


def first_integral_matrix(F: VectorField, points, basis: MonomialBasis,
                          rescaling: Rescaling) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``[grad m_alpha(s_i) . F_s(u_i)] / |F_s(u_i)|`` over non-constant monomials.

    ``s`` are rescaled coordinates and ``F_s = F / half_width`` the velocity
    in them.  Returns the matrix and the mask of kept (non-degenerate) rows.
    """
    pts = as_points(points, F.dim)
    s = rescaling.forward(pts)
    vel = F(pts) / rescaling.half_width
    norms = np.linalg.norm(vel, axis=1)
    keep = norms >= 1e-12
    if not keep.any():
        raise DegenerateRowsError("F vanishes at every point; no usable rows")
    s, vel, norms = s[keep], vel[keep], norms[keep]
    A = np.zeros((s.shape[0], len(basis)))
    for j in range(basis.dim):
        deriv = [0] * basis.dim
        deriv[j] = 1
        A += basis.evaluate(s, deriv) * vel[:, j : j + 1]
    A /= norms[:, None]
    return A[:, 1:], keep


def _default_fresh_x0(pts: np.ndarray) -> np.ndarray:
    center = pts.mean(axis=0)
    nearest = pts[int(np.argmin(np.linalg.norm(pts - center, axis=1)))]
    spread = pts.max(axis=0) - pts.min(axis=0)
    return nearest + 0.01 * spread


def first_integral_search(F: VectorField, points, degree: int, tol: float = 1e-6,
                          fresh_x0=None, cv_cfg: IntegratorConfig | None = None,
                          seed: int = 0) -> FirstIntegralSearch:
    pts = as_points(points, F.dim)
    basis = MonomialBasis(F.dim, degree)
    rescaling = Rescaling.fit(pts)
    A, keep = first_integral_matrix(F, pts, basis, rescaling)
    if A.shape[0] < A.shape[1]:
        raise UnderdeterminedError(f"{A.shape[0]} usable rows < {A.shape[1]} unknowns")
    _, s, vt = np.linalg.svd(A, full_matrices=False)
    v = _fix_sign(vt[-1])
    n = A.shape[0]
    residual = float(np.linalg.norm(A @ v) / math.sqrt(n))
    null_dim = int(np.sum(s / math.sqrt(n) <= tol))
    coeffs = np.concatenate([[0.0], v])

    drift = math.inf
    x0 = as_state(fresh_x0, F.dim) if fresh_x0 is not None else _default_fresh_x0(pts)
    if residual <= tol:
        drift = _cross_validation_drift(F, basis, coeffs, rescaling, x0, cv_cfg, seed)
    cert = None
    if residual <= tol and drift <= 10 * tol:
        cert = FirstIntegralCertificate(basis, coeffs, residual, drift, rescaling, tol, n,
                                        max(null_dim, 1), x0)
    return FirstIntegralSearch(cert, residual, drift, degree, tol, n, s)


def _cross_validation_drift(F, basis, coeffs, rescaling, x0, cfg, seed) -> float:
    cfg = cfg or IntegratorConfig(t_end=10.0, dt_sample=0.01)
    cfg = replace(cfg, t_burn=0.0)
    try:
        traj = flow(F, x0, cfg)
    except (EscapeError, NumericalError):
        return math.inf
    G = basis.evaluate(rescaling.forward(traj.states)) @ coeffs
    rng = np.random.default_rng(seed)
    probes = basis.evaluate(rng.uniform(-1.0, 1.0, size=(2000, basis.dim))) @ coeffs
    span = float(probes.max() - probes.min())
    if span <= 0:
        return math.inf
    return float(np.max(np.abs(G - G[0])) / span)


def find_first_integral(F: VectorField, points, degree: int, tol: float = 1e-6,
                        fresh_x0=None, cv_cfg: IntegratorConfig | None = None,
                        seed: int = 0) -> FirstIntegralCertificate | None:
    """Non-constant polynomial first integral of degree <= `degree`, or None.

    The smallest right singular vector of the velocity-normalised
    gradient matrix gives the candidate ``G``; it is returned only if its
    RMS residual is at most `tol` and it drifts by at most ``10 * tol``
    (relative to its range) along a fresh trajectory.
    """
    return first_integral_search(F, points, degree, tol, fresh_x0, cv_cfg, seed).certificate


def probe_points(lower, upper, n: int, seed: int = 0) -> np.ndarray:
    """Uniform random points in a box, for first-integral searches."""
    rng = np.random.default_rng(seed)
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    return lower + rng.random((n, lower.shape[0])) * (upper - lower)
