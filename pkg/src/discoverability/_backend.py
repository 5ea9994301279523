"""Pick the compiled kernels when importable, else the pure-Python ones.

Set ``DISCOVERABILITY_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _fallback

try:
    if os.environ.get("DISCOVERABILITY_PURE_PYTHON"):
        raise ImportError("disabled by DISCOVERABILITY_PURE_PYTHON")
    from . import _kernels as _ext
except ImportError:
    _ext = None

BACKENDS = ("compiled", "python") if _ext is not None else ("python",)
DEFAULT = BACKENDS[0]


def resolve(backend: str | None) -> str:
    backend = backend or DEFAULT
    if backend not in ("compiled", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "compiled" and _ext is None:
        raise RuntimeError("compiled kernels are not available in this installation")
    return backend


def sparse_polynomial(basis, coeffs):
    """Compress a ``(d, m)`` coefficient matrix to used monomials + COO terms."""
    coeffs = np.asarray(coeffs, dtype=float)
    used = np.flatnonzero(np.any(coeffs != 0.0, axis=0))
    exps = np.ascontiguousarray(basis.exponents[used], dtype=np.int64)
    remap = {int(c): i for i, c in enumerate(used)}
    rows, cols = np.nonzero(coeffs)
    return (
        exps,
        np.ascontiguousarray(rows, dtype=np.int32),
        np.ascontiguousarray([remap[int(c)] for c in cols], dtype=np.int32),
        np.ascontiguousarray(coeffs[rows, cols], dtype=float),
    )


def dopri5(field, x0, sample_times, t_end, rtol, atol, max_step, max_norm, max_steps,
           backend: str | None = None):
    backend = resolve(backend)
    poly = field.as_polynomial()
    if backend == "compiled" and poly is not None:
        exps, rows, cols, vals = sparse_polynomial(poly.basis, poly.coeffs)
        return _ext.dopri5_poly(
            exps, rows, cols, vals,
            np.ascontiguousarray(x0, dtype=float),
            np.ascontiguousarray(sample_times, dtype=float),
            float(t_end), float(rtol), float(atol), float(max_step), float(max_norm), int(max_steps),
        )
    return _fallback.dopri5(field, x0, sample_times, t_end, rtol, atol, max_step, max_norm, max_steps)


def pair_counts(points, radii, backend: str | None = None) -> np.ndarray:
    backend = resolve(backend)
    pts = np.ascontiguousarray(points, dtype=float)
    radii = np.ascontiguousarray(radii, dtype=float)
    if backend == "compiled":
        return _ext.pair_counts(pts, radii)
    return _fallback.pair_counts(pts, radii)
