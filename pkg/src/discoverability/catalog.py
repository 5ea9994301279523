"""Built-in systems and conservation laws with closed forms.

Every polynomial system also carries an exact :class:`PolynomialField`
twin; the compiled integrator runs on that twin and the test-suite checks
the two agree.  Known-property tags double as ground truth for the
acceptance suite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .core import (
    CatalogField,
    CatalogLaw,
    Domain,
    PolynomialField,
    PolynomialLaw,
    ValidationError,
)
from .polynomial import Polynomial


class UnknownEntryError(ValidationError, KeyError):
    def __str__(self) -> str:  # KeyError would repr() the message
        return str(self.args[0])


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    dim: int
    description: str
    func: Callable
    jac: Callable
    default_params: Mapping[str, float] = field(default_factory=dict)
    param_ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    polynomial: Callable[[Mapping[str, float]], list[Polynomial]] | None = None
    first_integral: Callable[[Mapping[str, float]], Callable[[np.ndarray], np.ndarray]] | None = None
    first_integral_polynomial: Callable[[Mapping[str, float]], Polynomial] | None = None
    properties: Mapping[str, object] = field(default_factory=dict)
    default_x0: tuple[float, ...] = ()
    domain: tuple[tuple[float, float], ...] = ()
    fixed_point: tuple[float, ...] | None = None
    variables: tuple[str, ...] = ()

    def default_domain(self) -> Domain:
        lo, hi = zip(*self.domain)
        return Domain(np.array(lo), np.array(hi))

    def summary(self) -> dict:
        return {
            "id": self.id,
            "dim": self.dim,
            "description": self.description,
            "params": dict(self.default_params),
            "variables": list(self.variables),
            "tags": {k: v for k, v in self.properties.items()},
        }


def _stack(*cols):
    return np.stack(np.broadcast_arrays(*cols), axis=-1)


def _jac(rows):
    """Stack a nested list of broadcastable arrays into ``(..., d, d)``."""
    return np.stack([_stack(*row) for row in rows], axis=-2)


def _vars(d: int) -> list[Polynomial]:
    return [Polynomial.variable(d, j) for j in range(d)]


# -- harmonic oscillator and its cubic twin ---------------------------------

def _sho(u, p):
    x, y = u[..., 0], u[..., 1]
    return _stack(y, -x)


def _sho_jac(u, p):
    z, one = np.zeros(u.shape[:-1]), np.ones(u.shape[:-1])
    return _jac([[z, one], [-one, z]])


def _sho_poly(p):
    x, y = _vars(2)
    return [y, -x]


def _sho_cubic(u, p):
    x, y = u[..., 0], u[..., 1]
    r2 = x * x + y * y
    return _stack(y * r2, -x * r2)


def _sho_cubic_jac(u, p):
    x, y = u[..., 0], u[..., 1]
    r2 = x * x + y * y
    return _jac([[2 * x * y, r2 + 2 * y * y], [-(r2 + 2 * x * x), -2 * x * y]])


def _sho_cubic_poly(p):
    x, y = _vars(2)
    r2 = x * x + y * y
    return [y * r2, -x * r2]


def _radius_sq(p):
    return lambda u: np.asarray(u)[..., 0] ** 2 + np.asarray(u)[..., 1] ** 2


def _radius_sq_poly(p):
    x, y = _vars(2)
    return x * x + y * y


# -- inward spiral -----------------------------------------------------------

def _spiral(u, p):
    e = p["eps"]
    x, y = u[..., 0], u[..., 1]
    return _stack(-y + e * x, x + e * y)


def _spiral_jac(u, p):
    e = p["eps"]
    shape = u.shape[:-1]
    return _jac([[np.full(shape, e), -np.ones(shape)], [np.ones(shape), np.full(shape, e)]])


def _spiral_poly(p):
    x, y = _vars(2)
    return [-y + p["eps"] * x, x + p["eps"] * y]


# -- Lorenz ------------------------------------------------------------------

def _lorenz(u, p):
    s, r, b = p["sigma"], p["rho"], p["beta"]
    x, y, z = u[..., 0], u[..., 1], u[..., 2]
    return _stack(s * (y - x), x * (r - z) - y, x * y - b * z)


def _lorenz_jac(u, p):
    s, r, b = p["sigma"], p["rho"], p["beta"]
    x, y, z = u[..., 0], u[..., 1], u[..., 2]
    zero, one = np.zeros_like(x), np.ones_like(x)
    return _jac([
        [-s * one, s * one, zero],
        [r - z, -one, -x],
        [y, x, -b * one],
    ])


def _lorenz_poly(p):
    x, y, z = _vars(3)
    return [p["sigma"] * (y - x), p["rho"] * x - x * z - y, x * y - p["beta"] * z]


# -- Rossler -----------------------------------------------------------------

def _rossler(u, p):
    a, b, c = p["a"], p["b"], p["c"]
    x, y, z = u[..., 0], u[..., 1], u[..., 2]
    return _stack(-y - z, x + a * y, b + z * (x - c))


def _rossler_jac(u, p):
    a, c = p["a"], p["c"]
    x, z = u[..., 0], u[..., 2]
    zero, one = np.zeros_like(x), np.ones_like(x)
    return _jac([[zero, -one, -one], [one, a * one, zero], [z, zero, x - c]])


def _rossler_poly(p):
    x, y, z = _vars(3)
    return [-y - z, x + p["a"] * y, p["b"] + x * z - p["c"] * z]


# -- nilpotent pair ----------------------------------------------------------

def _nil1(u, p):
    y = u[..., 1]
    return _stack(y, np.zeros_like(y))


def _nil1_jac(u, p):
    z, one = np.zeros(u.shape[:-1]), np.ones(u.shape[:-1])
    return _jac([[z, one], [z, z]])


def _nil1_poly(p):
    x, y = _vars(2)
    return [y, Polynomial(2)]


def _nil2(u, p):
    y = u[..., 1]
    return _stack(0.5 * y * y, np.zeros_like(y))


def _nil2_jac(u, p):
    y = u[..., 1]
    z = np.zeros_like(y)
    return _jac([[z, y], [z, z]])


def _nil2_poly(p):
    x, y = _vars(2)
    return [0.5 * y * y, Polynomial(2)]


# -- bistable, sink, gradient fixtures --------------------------------------

def _bistable(u, p):
    x, y = u[..., 0], u[..., 1]
    return _stack(x - x ** 3, -y)


def _bistable_jac(u, p):
    x = u[..., 0]
    z = np.zeros_like(x)
    return _jac([[1 - 3 * x * x, z], [z, -np.ones_like(x)]])


def _bistable_poly(p):
    x, y = _vars(2)
    return [x - x * x * x, -y]


def _sink(u, p):
    return -u


def _sink_jac(u, p):
    d = u.shape[-1]
    return np.broadcast_to(-np.eye(d), u.shape + (d,)).copy()


def _sink_poly(p):
    return [-v for v in _vars(2)]


def _gradq(u, p):
    x, y = u[..., 0], u[..., 1]
    return _stack(2 * x + y, x + 2 * y)


def _gradq_jac(u, p):
    shape = u.shape[:-1]
    two, one = np.full(shape, 2.0), np.ones(shape)
    return _jac([[two, one], [one, two]])


def _gradq_poly(p):
    x, y = _vars(2)
    return [2 * x + y, x + 2 * y]


# -- Henon-Heiles ------------------------------------------------------------

def _hh(u, p):
    x, y, px, py = (u[..., j] for j in range(4))
    return _stack(px, py, -x - 2 * x * y, -y - x * x + y * y)


def _hh_jac(u, p):
    x, y = u[..., 0], u[..., 1]
    z, one = np.zeros_like(x), np.ones_like(x)
    return _jac([
        [z, z, one, z],
        [z, z, z, one],
        [-1 - 2 * y, -2 * x, z, z],
        [-2 * x, -1 + 2 * y, z, z],
    ])


def _hh_poly(p):
    x, y, px, py = _vars(4)
    return [px, py, -x - 2 * x * y, -y - x * x + y * y]


def _hh_energy_poly(p):
    x, y, px, py = _vars(4)
    return 0.5 * (px * px + py * py) + 0.5 * (x * x + y * y) + x * x * y - (1.0 / 3.0) * y * y * y


def _hh_energy(p):
    poly = _hh_energy_poly(p)
    return lambda u: poly(np.atleast_2d(u))


# -- double pendulum (unit masses, lengths, gravity; angle/momentum form) ----

def _dp_parts(u):
    t1, t2, p1, p2 = (u[..., j] for j in range(4))
    delta = t1 - t2
    s, c = np.sin(delta), np.cos(delta)
    den = 1.0 + s * s
    return t1, t2, p1, p2, s, c, den


def _dp(u, p):
    t1, t2, p1, p2, s, c, den = _dp_parts(u)
    a = p1 * p2 * s / den
    n = p1 * p1 + 2 * p2 * p2 - 2 * p1 * p2 * c
    b = n * s * c / den ** 2
    return _stack(
        (p1 - p2 * c) / den,
        (2 * p2 - p1 * c) / den,
        -2 * np.sin(t1) - a + b,
        -np.sin(t2) + a - b,
    )


def _dp_jac(u, p):
    t1, t2, p1, p2, s, c, den = _dp_parts(u)
    dden = 2 * s * c
    f1_d = p2 * s / den - (p1 - p2 * c) * dden / den ** 2
    f2_d = p1 * s / den - (2 * p2 - p1 * c) * dden / den ** 2
    a_d = p1 * p2 * (c / den - s * dden / den ** 2)
    a_p1, a_p2 = p2 * s / den, p1 * s / den
    n = p1 * p1 + 2 * p2 * p2 - 2 * p1 * p2 * c
    g = s * c / den ** 2
    g_d = (c * c - s * s) / den ** 2 - s * c * 2 * dden / den ** 3
    b_d = 2 * p1 * p2 * s * g + n * g_d
    b_p1, b_p2 = (2 * p1 - 2 * p2 * c) * g, (4 * p2 - 2 * p1 * c) * g
    return _jac([
        [f1_d, -f1_d, 1 / den, -c / den],
        [f2_d, -f2_d, -c / den, 2 / den],
        [-2 * np.cos(t1) - a_d + b_d, a_d - b_d, -a_p1 + b_p1, -a_p2 + b_p2],
        [a_d - b_d, -np.cos(t2) - a_d + b_d, a_p1 - b_p1, a_p2 - b_p2],
    ])


def _dp_energy(p):
    def energy(u):
        t1, t2, p1, p2, s, c, den = _dp_parts(np.atleast_2d(u))
        return (p1 * p1 + 2 * p2 * p2 - 2 * p1 * p2 * c) / (2 * den) - 2 * np.cos(t1) - np.cos(t2)
    return energy


_ENTRIES: dict[str, CatalogEntry] = {}


def _register(entry: CatalogEntry) -> None:
    _ENTRIES[entry.id] = entry


_register(CatalogEntry(
    "sho", 2, "harmonic oscillator x' = y, y' = -x",
    _sho, _sho_jac, polynomial=_sho_poly,
    first_integral=_radius_sq, first_integral_polynomial=_radius_sq_poly,
    properties={"has-first-integral": True, "non-discoverable-C0": True,
                "non-discoverable-analytic": True, "periodic": True},
    default_x0=(1.0, 0.0), domain=((-2.0, 2.0), (-2.0, 2.0)), fixed_point=(0.0, 0.0),
    variables=("x", "y"),
))
_register(CatalogEntry(
    "sho-cubic", 2, "x' = y(x^2+y^2), y' = -x(x^2+y^2); same unit circle orbit as sho",
    _sho_cubic, _sho_cubic_jac, polynomial=_sho_cubic_poly,
    first_integral=_radius_sq, first_integral_polynomial=_radius_sq_poly,
    properties={"has-first-integral": True, "periodic": True, "non-discoverable-analytic": True},
    default_x0=(1.0, 0.0), domain=((-2.0, 2.0), (-2.0, 2.0)), fixed_point=(0.0, 0.0),
    variables=("x", "y"),
))
_register(CatalogEntry(
    "spiral", 2, "u1' = -u2 + eps u1, u2' = u1 + eps u2 (inward for eps < 0)",
    _spiral, _spiral_jac, default_params={"eps": -0.05}, param_ranges={"eps": (-1.0, 1.0)},
    polynomial=_spiral_poly,
    properties={"discoverable-analytic": True, "non-dense": True},
    default_x0=(1.0, 0.0), domain=((-2.0, 2.0), (-2.0, 2.0)), fixed_point=(0.0, 0.0),
    variables=("u1", "u2"),
))
_register(CatalogEntry(
    "lorenz", 3, "Lorenz system",
    _lorenz, _lorenz_jac,
    default_params={"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0},
    param_ranges={"sigma": (0.0, 100.0), "rho": (0.0, 500.0), "beta": (0.0, 20.0)},
    polynomial=_lorenz_poly,
    properties={"chaotic-attractor": True, "expected-dimension": 2.06, "discoverable-analytic": True},
    default_x0=(1.0, 1.0, 1.0), domain=((-30.0, 30.0), (-30.0, 30.0), (-5.0, 60.0)),
    fixed_point=(0.0, 0.0, 0.0), variables=("x", "y", "z"),
))
_register(CatalogEntry(
    "rossler", 3, "Rossler system",
    _rossler, _rossler_jac, default_params={"a": 0.2, "b": 0.2, "c": 5.7},
    param_ranges={"a": (0.0, 1.0), "b": (0.0, 5.0), "c": (0.0, 50.0)},
    polynomial=_rossler_poly,
    properties={"chaotic-attractor": True, "expected-dimension": 2.01},
    default_x0=(1.0, 1.0, 0.0), domain=((-15.0, 15.0), (-15.0, 15.0), (-1.0, 30.0)),
    variables=("x", "y", "z"),
))
_register(CatalogEntry(
    "nilpotent-f1", 2, "F1(x, y) = (y, 0)",
    _nil1, _nil1_jac, polynomial=_nil1_poly,
    properties={"jacobian-symmetry": "neither"},
    default_x0=(0.0, 0.5), domain=((-1.0, 1.0), (-1.0, 1.0)), fixed_point=(0.0, 0.0),
    variables=("x", "y"),
))
_register(CatalogEntry(
    "nilpotent-f2", 2, "F2(x, y) = (y^2 / 2, 0)",
    _nil2, _nil2_jac, polynomial=_nil2_poly,
    properties={"jacobian-symmetry": "neither"},
    default_x0=(0.0, 0.5), domain=((-1.0, 1.0), (-1.0, 1.0)), fixed_point=(0.0, 0.0),
    variables=("x", "y"),
))
_register(CatalogEntry(
    "bistable", 2, "x' = x - x^3, y' = -y (two sinks at x = +-1)",
    _bistable, _bistable_jac, polynomial=_bistable_poly,
    properties={"multistable": True},
    default_x0=(1.5, 1.0), domain=((-2.0, 2.0), (-2.0, 2.0)), fixed_point=(1.0, 0.0),
    variables=("x", "y"),
))
_register(CatalogEntry(
    "sink", 2, "global sink u' = -u",
    _sink, _sink_jac, polynomial=_sink_poly,
    properties={"jacobian-symmetry": "symmetric", "trapping": True},
    default_x0=(1.0, 1.0), domain=((-1.0, 1.0), (-1.0, 1.0)), fixed_point=(0.0, 0.0),
    variables=("x", "y"),
))
_register(CatalogEntry(
    "gradient-quadratic", 2, "gradient of x^2 + xy + y^2",
    _gradq, _gradq_jac, polynomial=_gradq_poly,
    properties={"jacobian-symmetry": "symmetric"},
    default_x0=(1.0, 0.0), domain=((-1.0, 1.0), (-1.0, 1.0)), fixed_point=(0.0, 0.0),
    variables=("x", "y"),
))
_register(CatalogEntry(
    "henon-heiles", 4, "Henon-Heiles Hamiltonian flow in (x, y, px, py)",
    _hh, _hh_jac, polynomial=_hh_poly,
    first_integral=_hh_energy, first_integral_polynomial=_hh_energy_poly,
    properties={"has-first-integral": True, "not-chaotic-in-position-momentum": True},
    default_x0=(0.1, 0.0, 0.0, 0.45), domain=((-1.0, 1.0),) * 4, fixed_point=(0.0, 0.0, 0.0, 0.0),
    variables=("x", "y", "px", "py"),
))
_register(CatalogEntry(
    "double-pendulum", 4, "double pendulum, unit masses/lengths/gravity, (theta1, theta2, p1, p2)",
    _dp, _dp_jac, first_integral=_dp_energy,
    properties={"has-first-integral": True, "not-chaotic-in-position-momentum": True},
    default_x0=(1.0, 0.5, 0.0, 0.0), domain=((-np.pi, np.pi),) * 2 + ((-5.0, 5.0),) * 2,
    fixed_point=(0.0, 0.0, 0.0, 0.0), variables=("theta1", "theta2", "p1", "p2"),
))


def ids() -> list[str]:
    return list(_ENTRIES)


def entry(system_id: str) -> CatalogEntry:
    try:
        return _ENTRIES[system_id]
    except KeyError:
        raise UnknownEntryError(
            f"unknown system {system_id!r}; catalog has: {', '.join(_ENTRIES)}"
        ) from None


def _resolve_params(e: CatalogEntry, params: Mapping[str, float] | None) -> dict[str, float]:
    out = dict(e.default_params)
    for key, value in (params or {}).items():
        if key not in out:
            raise ValidationError(f"{e.id} has no parameter {key!r} (has {sorted(out)})")
        lo, hi = e.param_ranges.get(key, (-np.inf, np.inf))
        if not lo <= float(value) <= hi:
            raise ValidationError(f"{e.id}: {key}={value} outside [{lo}, {hi}]")
        out[key] = float(value)
    return out


def get(system_id: str, params: Mapping[str, float] | None = None, **kwargs) -> CatalogField:
    """Instantiate a catalog system as a vector field."""
    e = entry(system_id)
    p = _resolve_params(e, {**(params or {}), **kwargs})
    poly = None
    if e.polynomial is not None:
        polys = e.polynomial(p)
        degree = max(1, max(q.degree for q in polys))
        poly = PolynomialField.from_polynomials(polys, degree, system_id)
    return CatalogField(system_id, e.dim, p, e.func, e.jac, poly)


def first_integral(system_id: str, params: Mapping[str, float] | None = None):
    e = entry(system_id)
    if e.first_integral is None:
        return None
    return e.first_integral(_resolve_params(e, params))


def first_integral_polynomial(system_id: str, params: Mapping[str, float] | None = None):
    e = entry(system_id)
    if e.first_integral_polynomial is None:
        return None
    return e.first_integral_polynomial(_resolve_params(e, params))


def listing() -> list[dict]:
    return [e.summary() for e in _ENTRIES.values()]


# ---------------------------------------------------------------------------
# conservation laws H(v, u); v is the velocity slot


def _sho_full_h(v, u):
    uv = np.sum(u * v, axis=-1)
    gap = np.sum(v * v, axis=-1) - np.sum(u * u, axis=-1)
    return 0.5 * uv ** 2 + 0.5 * gap ** 2


def _sho_full_grad(v, u):
    uv = np.sum(u * v, axis=-1)[..., None]
    gap = (np.sum(v * v, axis=-1) - np.sum(u * u, axis=-1))[..., None]
    return uv * u + 2 * gap * v


def _sho_full_hess(v, u):
    v, u = np.broadcast_arrays(v, u)
    gap = (np.sum(v * v, axis=-1) - np.sum(u * u, axis=-1))[..., None, None]
    eye = np.eye(u.shape[-1])
    return np.einsum("...i,...j->...ij", u, u) + 2 * gap * eye + 4 * np.einsum("...i,...j->...ij", v, v)


def _sho_radial_h(v, u):
    return np.sum(u * v, axis=-1) ** 2


def _sho_radial_grad(v, u):
    v, u = np.broadcast_arrays(v, u)
    return 2 * np.sum(u * v, axis=-1)[..., None] * u


def _sho_radial_hess(v, u):
    v, u = np.broadcast_arrays(v, u)
    return 2 * np.einsum("...i,...j->...ij", u, u)


def _nil_h(v, u):
    return 0.5 * v[..., 1] ** 2 + 0.0 * u[..., 0]


def _nil_grad(v, u):
    v, u = np.broadcast_arrays(v, u)
    return _stack(np.zeros_like(v[..., 0]), v[..., 1])


def _nil_hess(v, u):
    v, u = np.broadcast_arrays(v, u)
    out = np.zeros(v.shape + (2,))
    out[..., 1, 1] = 1.0
    return out


_LAWS: dict[str, CatalogLaw] = {
    "sho-full": CatalogLaw(
        "sho-full", 2, _sho_full_h, _sho_full_grad, _sho_full_hess,
        "H = 1/2 (x vx + y vy)^2 + 1/2 (vx^2 + vy^2 - x^2 - y^2)^2",
    ),
    "sho-radial": CatalogLaw(
        "sho-radial", 2, _sho_radial_h, _sho_radial_grad, _sho_radial_hess,
        "H = (x vx + y vy)^2",
    ),
    "nilpotent": CatalogLaw("nilpotent", 2, _nil_h, _nil_grad, _nil_hess, "H = 1/2 vy^2"),
}


def _law_polynomials() -> dict[str, Polynomial]:
    vx, vy, x, y = _vars(4)
    uv = x * vx + y * vy
    gap = vx * vx + vy * vy - x * x - y * y
    return {
        "sho-full": 0.5 * uv * uv + 0.5 * gap * gap,
        "sho-radial": uv * uv,
        "nilpotent": 0.5 * vy * vy,
    }


def law_ids() -> list[str]:
    return list(_LAWS)


def get_law(law_id: str) -> CatalogLaw:
    try:
        return _LAWS[law_id]
    except KeyError:
        raise UnknownEntryError(f"unknown law {law_id!r}; catalog has: {', '.join(_LAWS)}") from None


def get_law_polynomial(law_id: str) -> PolynomialLaw:
    """The same law as an explicit polynomial over ``(v, u)``."""
    get_law(law_id)
    return PolynomialLaw(_law_polynomials()[law_id], law_id)
