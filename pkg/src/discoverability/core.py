"""Shared domain types: vector fields, trajectories, domains, conservation laws.

A state is a plain ``ndarray`` of shape ``(d,)``; batches of states are
``(n, d)``.  Every evaluator in this module is vectorised over leading axes.
"""
from __future__ import annotations

import csv
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .polynomial import MonomialBasis, Polynomial, vector_field_polynomials


class DiscoverabilityError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DiscoverabilityError, ValueError):
    """Bad input: wrong shapes, inconsistent configuration, unknown ids."""


class DimensionMismatchError(ValidationError):
    pass


class PreconditionError(ValidationError):
    """A documented precondition of an analysis does not hold."""


class NumericalError(DiscoverabilityError):
    """A numerical procedure could not produce a trustworthy result."""


# ---------------------------------------------------------------------------
# states, domains, rescaling


def as_state(u, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"state must be 1-D, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(f"state has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"state has non-finite entries: {arr}")
    return arr


def as_points(points, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None] if dim == 1 else arr[None, :]
    if arr.ndim != 2:
        raise DimensionMismatchError(f"points must be 2-D (n, d), got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatchError(f"points have dimension {arr.shape[1]}, expected {dim}")
    return arr


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``[lower, upper]`` in state space."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise DimensionMismatchError("domain bounds have different dimensions")
        if not np.all(lo < hi):
            raise ValidationError(f"domain needs lower < upper componentwise, got {lo}, {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def extent(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, points, strict: bool = False) -> np.ndarray:
        pts = as_points(points, self.dim)
        if strict:
            return np.all((pts > self.lower) & (pts < self.upper), axis=1)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)

    @classmethod
    def parse(cls, text: str) -> "Domain":
        """Parse ``"lo,hi;lo,hi;..."`` (one ``lo,hi`` pair per axis)."""
        try:
            pairs = [tuple(float(x) for x in axis.split(",")) for axis in text.split(";")]
        except ValueError as exc:
            raise ValidationError(f"cannot parse domain {text!r}: {exc}") from None
        if any(len(p) != 2 for p in pairs):
            raise ValidationError(f"domain {text!r} must be 'lo,hi' pairs separated by ';'")
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))

    @classmethod
    def bounding(cls, points, pad: float = 0.05) -> "Domain":
        pts = as_points(points)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        width = np.where(hi > lo, hi - lo, 1.0)
        return cls(lo - pad * width, hi + pad * width)

    def to_list(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in zip(self.lower, self.upper)]


@dataclass(frozen=True)
class Rescaling:
    """Affine map ``s = (u - center) / half_width`` onto (roughly) ``[-1, 1]^d``."""

    center: np.ndarray
    half_width: np.ndarray

    @classmethod
    def fit(cls, points) -> "Rescaling":
        pts = as_points(points)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        half = (hi - lo) / 2.0
        half = np.where(half > 0, half, 1.0)
        return cls((hi + lo) / 2.0, half)

    @classmethod
    def from_domain(cls, domain: Domain) -> "Rescaling":
        return cls((domain.upper + domain.lower) / 2.0, domain.extent / 2.0)

    @classmethod
    def identity(cls, dim: int) -> "Rescaling":
        return cls(np.zeros(dim), np.ones(dim))

    def forward(self, u) -> np.ndarray:
        return (np.asarray(u, dtype=float) - self.center) / self.half_width

    def inverse(self, s) -> np.ndarray:
        return np.asarray(s, dtype=float) * self.half_width + self.center

    def pull_back(self, poly: Polynomial) -> Polynomial:
        """Express a polynomial in scaled coordinates as one in original coordinates."""
        return poly.substitute_affine(1.0 / self.half_width, -self.center / self.half_width)

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "half_width": self.half_width.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Rescaling":
        return cls(np.asarray(data["center"], float), np.asarray(data["half_width"], float))


# ---------------------------------------------------------------------------
# vector fields


class VectorField(ABC):
    """Autonomous vector field ``F: R^d -> R^d``."""

    dim: int

    @property
    @abstractmethod
    def field_id(self) -> str: ...

    @abstractmethod
    def __call__(self, u) -> np.ndarray:
        """Evaluate at ``u`` of shape ``(..., d)``."""

    @abstractmethod
    def jacobian(self, u) -> np.ndarray:
        """Jacobian at ``u``; shape ``(..., d, d)`` with ``J[i, j] = dF_i/du_j``."""

    def as_polynomial(self) -> "PolynomialField | None":
        return None

    def reversed(self) -> "VectorField":
        """The time-reversed field ``-F``."""
        return _NegatedField(self)


@dataclass(frozen=True, eq=False)
class PolynomialField(VectorField):
    """``F_i(u) = sum_alpha coeffs[i, alpha] u^alpha`` over a graded-lex basis."""

    basis: MonomialBasis
    coeffs: np.ndarray
    name: str = "polynomial"

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.basis.dim, len(self.basis)):
            raise DimensionMismatchError(
                f"coeffs must have shape ({self.basis.dim}, {len(self.basis)}), got {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.basis.dim

    @property
    def field_id(self) -> str:
        return self.name

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1, self.dim)
        out = self.basis.evaluate(flat) @ self.coeffs.T
        return out.reshape(u.shape)

    def jacobian(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1, self.dim)
        d = self.dim
        jac = np.empty((flat.shape[0], d, d))
        for j in range(d):
            deriv = [0] * d
            deriv[j] = 1
            jac[:, :, j] = self.basis.evaluate(flat, deriv) @ self.coeffs.T
        return jac.reshape(u.shape[:-1] + (d, d))

    def as_polynomial(self) -> "PolynomialField":
        return self

    def reversed(self) -> "PolynomialField":
        return PolynomialField(self.basis, -self.coeffs, f"-{self.name}")

    def polynomials(self) -> list[Polynomial]:
        return vector_field_polynomials(self.basis, self.coeffs)

    @classmethod
    def from_polynomials(cls, polys: Sequence[Polynomial], max_degree: int | None = None,
                         name: str = "polynomial") -> "PolynomialField":
        dim = polys[0].dim
        degree = max(p.degree for p in polys) if max_degree is None else max_degree
        basis = MonomialBasis(dim, degree)
        return cls(basis, np.array([p.to_vector(basis) for p in polys]), name)

    def with_degree(self, max_degree: int) -> "PolynomialField":
        return PolynomialField.from_polynomials(self.polynomials(), max_degree, self.name)

    def to_json(self) -> dict:
        return {"dim": self.dim, "max_degree": self.basis.max_degree, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_json(cls, data: Mapping, name: str = "polynomial") -> "PolynomialField":
        try:
            basis = MonomialBasis(int(data["dim"]), int(data["max_degree"]))
            return cls(basis, np.asarray(data["coeffs"], dtype=float), name)
        except KeyError as exc:
            raise ValidationError(f"field file is missing key {exc}") from None


@dataclass(frozen=True, eq=False)
class CatalogField(VectorField):
    """Closed-form field with an authoritative closed-form Jacobian."""

    system_id: str
    dim: int  # type: ignore[misc]
    params: Mapping[str, float]
    func: Callable[[np.ndarray, Mapping[str, float]], np.ndarray]
    jac: Callable[[np.ndarray, Mapping[str, float]], np.ndarray]
    polynomial: PolynomialField | None = None

    @property
    def field_id(self) -> str:
        return self.system_id

    def __call__(self, u) -> np.ndarray:
        return np.asarray(self.func(np.asarray(u, dtype=float), self.params), dtype=float)

    def jacobian(self, u) -> np.ndarray:
        return np.asarray(self.jac(np.asarray(u, dtype=float), self.params), dtype=float)

    def as_polynomial(self) -> PolynomialField | None:
        return self.polynomial


@dataclass(frozen=True, eq=False)
class _NegatedField(VectorField):
    base: VectorField

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.base.dim

    @property
    def field_id(self) -> str:
        return f"-{self.base.field_id}"

    def __call__(self, u) -> np.ndarray:
        return -self.base(u)

    def jacobian(self, u) -> np.ndarray:
        return -self.base.jacobian(u)

    def as_polynomial(self) -> PolynomialField | None:
        poly = self.base.as_polynomial()
        return None if poly is None else poly.reversed()

    def reversed(self) -> VectorField:
        return self.base


def eval_field(F: VectorField, u) -> np.ndarray:
    """``F(u)`` for a single state, with a dimension check."""
    return F(as_state(u, F.dim))


def eval_jacobian(F: VectorField, u) -> np.ndarray:
    """``dF/du`` at a single state, shape ``(d, d)``."""
    return F.jacobian(as_state(u, F.dim))


def finite_difference_jacobian(func: Callable[[np.ndarray], np.ndarray], u, h: float = 1e-6) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    cols = []
    for j in range(u.shape[0]):
        step = h * max(1.0, abs(u[j]))
        e = np.zeros_like(u)
        e[j] = step
        cols.append((func(u + e) - func(u - e)) / (2 * step))
    return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered samples of one orbit.

    ``x0`` is the first retained state.  When a transient was discarded the
    original initial condition is kept in ``origin``.
    """

    times: np.ndarray
    states: np.ndarray
    field_id: str = "unknown"
    rel_tol: float | None = None
    abs_tol: float | None = None
    origin: np.ndarray | None = None
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.times, dtype=float).reshape(-1)
        x = np.array(self.states, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] != t.shape[0]:
            raise DimensionMismatchError(f"times {t.shape} and states {x.shape} disagree")
        if t.shape[0] < 2:
            raise ValidationError("a trajectory needs at least 2 samples")
        if not np.all(np.diff(t) > 0):
            raise ValidationError("trajectory times must be strictly increasing")
        if not np.all(np.isfinite(x)):
            raise ValidationError("trajectory contains non-finite states")
        t.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", x)
        if self.origin is not None:
            object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))

    @property
    def x0(self) -> np.ndarray:
        return self.states[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.times.shape[0]

    def to_csv(self, path) -> None:
        header = ["t"] + [f"x{j + 1}" for j in range(self.dim)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t, row in zip(self.times, self.states):
                writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, field_id: str | None = None) -> "Trajectory":
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            expected = ["t"] + [f"x{j + 1}" for j in range(len(header or []) - 1)]
            if header is None or len(header) < 2 or [h.strip() for h in header] != expected:
                raise ValidationError(f"{path}: expected header 't,x1,...,xd'")
            rows = [[float(v) for v in r] for r in reader if r]
        data = np.array(rows, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(header):
            raise ValidationError(f"{path}: ragged rows")
        return cls(data[:, 0], data[:, 1:], field_id=field_id or f"file:{path.name}")


# ---------------------------------------------------------------------------
# conservation laws H(v, u)


class ConservationLaw(ABC):
    """Scalar ``H(v, u)`` with ``v`` standing for the velocity ``u'``."""

    dim: int

    @property
    @abstractmethod
    def law_id(self) -> str: ...

    @abstractmethod
    def value(self, v, u) -> np.ndarray: ...

    @abstractmethod
    def grad_v(self, v, u) -> np.ndarray:
        """Gradient with respect to ``v``; shape ``(..., d)``."""

    @abstractmethod
    def hess_v(self, v, u) -> np.ndarray:
        """Hessian with respect to ``v``; shape ``(..., d, d)``."""


@dataclass(frozen=True, eq=False)
class CatalogLaw(ConservationLaw):
    law_id_: str
    dim: int  # type: ignore[misc]
    h: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray, np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray, np.ndarray], np.ndarray]
    formula: str = ""

    @property
    def law_id(self) -> str:
        return self.law_id_

    def value(self, v, u):
        return self.h(np.asarray(v, float), np.asarray(u, float))

    def grad_v(self, v, u):
        return self.grad(np.asarray(v, float), np.asarray(u, float))

    def hess_v(self, v, u):
        return self.hess(np.asarray(v, float), np.asarray(u, float))


@dataclass(frozen=True, eq=False)
class PolynomialLaw(ConservationLaw):
    """Polynomial ``H`` over the stacked variables ``(v, u)`` in ``R^{2d}``."""

    poly: Polynomial
    name: str = "polynomial-law"

    def __post_init__(self):
        if self.poly.dim % 2:
            raise DimensionMismatchError("a law polynomial must have 2d variables (v, u)")

    @property
    def dim(self) -> int:  # type: ignore[override]
        return self.poly.dim // 2

    @property
    def law_id(self) -> str:
        return self.name

    def _stack(self, v, u):
        v, u = np.broadcast_arrays(np.asarray(v, float), np.asarray(u, float))
        return np.concatenate([v, u], axis=-1)

    def value(self, v, u):
        z = self._stack(v, u)
        return self.poly(z.reshape(-1, 2 * self.dim)).reshape(z.shape[:-1])

    def grad_v(self, v, u):
        z = self._stack(v, u)
        flat = z.reshape(-1, 2 * self.dim)
        out = np.stack([self.poly.derivative(j)(flat) for j in range(self.dim)], axis=-1)
        return out.reshape(z.shape[:-1] + (self.dim,))

    def hess_v(self, v, u):
        z = self._stack(v, u)
        flat = z.reshape(-1, 2 * self.dim)
        d = self.dim
        out = np.empty((flat.shape[0], d, d))
        for i in range(d):
            di = self.poly.derivative(i)
            for j in range(i, d):
                out[:, i, j] = out[:, j, i] = di.derivative(j)(flat)
        return out.reshape(z.shape[:-1] + (d, d))


def load_field_json(path) -> PolynomialField:
    with open(path) as fh:
        return PolynomialField.from_json(json.load(fh), name=f"file:{Path(path).name}")
