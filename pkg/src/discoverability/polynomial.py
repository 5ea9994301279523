"""Monomial bases in graded-lex order and a small sparse polynomial type.

Everything downstream that talks about "the analytic class" works with
polynomials of bounded degree, so this module is the shared vocabulary:
:class:`MonomialBasis` fixes a column order for coefficient vectors and
:class:`Polynomial` does the exact algebra (products, derivatives, affine
substitution) needed to build alternative fields and to check first
integrals symbolically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


def _compositions(total: int, parts: int) -> Iterable[Exponent]:
    """Exponent tuples of length `parts` summing to `total`, descending lex."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class MonomialBasis:
    """All monomials in `dim` variables of total degree at most `max_degree`.

    Ordering is graded lexicographic: degree first, then descending
    exponent of the first variable, then the second, and so on.  For
    ``dim=2, max_degree=2`` the order is ``1, x, y, x^2, xy, y^2``.
    """

    dim: int
    max_degree: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.max_degree < 0:
            raise ValueError(f"max_degree must be >= 0, got {self.max_degree}")

    @cached_property
    def exponents(self) -> np.ndarray:
        rows = [
            alpha
            for deg in range(self.max_degree + 1)
            for alpha in _compositions(deg, self.dim)
        ]
        arr = np.array(rows, dtype=np.int64).reshape(-1, self.dim)
        arr.setflags(write=False)
        return arr

    @cached_property
    def _index(self) -> dict[Exponent, int]:
        return {tuple(int(e) for e in row): i for i, row in enumerate(self.exponents)}

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.exponents.sum(axis=1)

    def __len__(self) -> int:
        return math.comb(self.dim + self.max_degree, self.max_degree)

    def index(self, alpha: Sequence[int]) -> int:
        try:
            return self._index[tuple(int(a) for a in alpha)]
        except KeyError:
            raise KeyError(f"monomial {tuple(alpha)} not in {self}") from None

    def evaluate(self, points, deriv: Sequence[int] | None = None) -> np.ndarray:
        """Monomial values (or a mixed partial derivative of them) at points.

        Parameters
        ----------
        points : array_like, shape (n, dim) or (dim,)
        deriv : multi-index, optional
            Evaluate ``d^deriv m_alpha`` instead of ``m_alpha``.

        Returns
        -------
        ndarray, shape (n, len(self)) (or (len(self),) for a single point)
        """
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.dim:
            raise ValueError(f"points have dimension {pts.shape[1]}, basis expects {self.dim}")
        exps = self.exponents
        factor = np.ones(len(exps))
        if deriv is not None:
            beta = np.asarray(deriv, dtype=np.int64)
            exps = exps - beta
            ok = np.all(exps >= 0, axis=1)
            for j in range(self.dim):
                for k in range(int(beta[j])):
                    factor = factor * (self.exponents[:, j] - k)
            factor = np.where(ok, factor, 0.0)
            exps = np.where(exps >= 0, exps, 0)
        # powers[j][:, k] = x_j ** k
        out = np.ones((pts.shape[0], len(exps)))
        for j in range(self.dim):
            powers = pts[:, j : j + 1] ** np.arange(self.max_degree + 1)
            out *= powers[:, exps[:, j]]
        out *= factor
        return out[0] if single else out

    def labels(self, names: Sequence[str] | None = None) -> list[str]:
        names = list(names) if names is not None else [f"x{j + 1}" for j in range(self.dim)]
        return [_monomial_label(tuple(row), names) for row in self.exponents]


def _monomial_label(alpha: Exponent, names: Sequence[str]) -> str:
    parts = []
    for name, e in zip(names, alpha):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


class Polynomial:
    """Sparse real polynomial ``sum c_alpha x^alpha`` in a fixed number of variables."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Exponent, float] | None = None):
        self.dim = int(dim)
        clean: dict[Exponent, float] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.dim:
                raise ValueError(f"exponent {alpha} has wrong length for dim={self.dim}")
            c = float(c)
            if c != 0.0:
                clean[alpha] = clean.get(alpha, 0.0) + c
        self.terms = {a: c for a, c in clean.items() if c != 0.0}

    # construction ---------------------------------------------------------

    @classmethod
    def constant(cls, dim: int, value: float) -> "Polynomial":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def variable(cls, dim: int, j: int) -> "Polynomial":
        alpha = [0] * dim
        alpha[j] = 1
        return cls(dim, {tuple(alpha): 1.0})

    @classmethod
    def from_vector(cls, basis: MonomialBasis, coeffs) -> "Polynomial":
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (len(basis),):
            raise ValueError(f"expected {len(basis)} coefficients, got shape {coeffs.shape}")
        return cls(basis.dim, {tuple(int(e) for e in row): c for row, c in zip(basis.exponents, coeffs)})

    def to_vector(self, basis: MonomialBasis) -> np.ndarray:
        if basis.dim != self.dim:
            raise ValueError("basis dimension does not match polynomial")
        out = np.zeros(len(basis))
        for alpha, c in self.terms.items():
            if sum(alpha) > basis.max_degree:
                raise ValueError(f"degree {sum(alpha)} term does not fit a degree-{basis.max_degree} basis")
            out[basis.index(alpha)] = c
        return out

    # inspection -----------------------------------------------------------

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, alpha: Sequence[int]) -> float:
        return self.terms.get(tuple(alpha), 0.0)

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0])
        for alpha, c in self.terms.items():
            out += c * np.prod(pts ** np.asarray(alpha), axis=1)
        return out[0] if single else out

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    # algebra --------------------------------------------------------------

    def __add__(self, other: "Polynomial | float") -> "Polynomial":
        other = self._coerce(other)
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0.0) + c
        return Polynomial(self.dim, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.dim, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other: "Polynomial | float") -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: float) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if isinstance(other, (int, float, np.floating)):
            return Polynomial(self.dim, {a: c * float(other) for a, c in self.terms.items()})
        other = self._coerce(other)
        terms: dict[Exponent, float] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                terms[key] = terms.get(key, 0.0) + ca * cb
        return Polynomial(self.dim, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        out = Polynomial.constant(self.dim, 1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.dim == other.dim and self.terms == other.terms

    def __repr__(self) -> str:
        return f"Polynomial({self.dim}, {self.format()})"

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.dim != self.dim:
                raise ValueError("polynomials live in different dimensions")
            return other
        return Polynomial.constant(self.dim, float(other))

    def derivative(self, axis: int) -> "Polynomial":
        terms = {}
        for a, c in self.terms.items():
            if a[axis] > 0:
                b = list(a)
                b[axis] -= 1
                terms[tuple(b)] = c * a[axis]
        return Polynomial(self.dim, terms)

    def gradient(self) -> list["Polynomial"]:
        return [self.derivative(j) for j in range(self.dim)]

    def substitute_affine(self, scale, shift) -> "Polynomial":
        """Return ``q(x) = p(scale * x + shift)`` (componentwise), expanded exactly."""
        scale = np.broadcast_to(np.asarray(scale, dtype=float), (self.dim,))
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.dim,))
        linear = [
            Polynomial(self.dim, {tuple(int(i == j) for i in range(self.dim)): scale[j]})
            + float(shift[j])
            for j in range(self.dim)
        ]
        cache: dict[tuple[int, int], Polynomial] = {}

        def power(j: int, e: int) -> Polynomial:
            if (j, e) not in cache:
                cache[(j, e)] = linear[j] ** e
            return cache[(j, e)]

        out = Polynomial(self.dim)
        for a, c in self.terms.items():
            term = Polynomial.constant(self.dim, c)
            for j, e in enumerate(a):
                if e:
                    term = term * power(j, e)
            out = out + term
        return out

    def chop(self, atol: float) -> "Polynomial":
        return Polynomial(self.dim, {a: c for a, c in self.terms.items() if abs(c) > atol})

    def format(self, names: Sequence[str] | None = None, digits: int = 6) -> str:
        names = list(names) if names is not None else [f"x{j + 1}" for j in range(self.dim)]
        if not self.terms:
            return "0"
        keys = sorted(self.terms, key=lambda a: (sum(a), tuple(-x for x in a)))
        return " + ".join(
            f"{self.terms[a]:.{digits}g}*{_monomial_label(a, names)}" for a in keys
        ).replace("*1 ", " ").replace("+ -", "- ")


def vector_field_polynomials(basis: MonomialBasis, coeffs) -> list[Polynomial]:
    """Rows of a ``(d, |basis|)`` coefficient matrix as polynomials."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    return [Polynomial.from_vector(basis, row) for row in coeffs]


def smallest_basis(polys: Iterable[Polynomial], dim: int) -> MonomialBasis:
    degree = max((p.degree for p in polys), default=0)
    return MonomialBasis(dim, degree)


__all__ = [
    "MonomialBasis",
    "Polynomial",
    "vector_field_polynomials",
    "smallest_basis",
]
