"""Uniqueness tests that use a known conservation law ``H(v, u) = 0``.

* :func:`hessian_test`: if ``grad_v H`` vanishes along the data and the
  ``v``-Hessian is non-singular somewhere, the law pins the velocity
  down locally.
* :func:`kernel_inclusion_test`: a weaker condition, the Hessian kernel
  lies inside the tangent space of the data, which only helps for fields
  with symmetric or skew-symmetric Jacobians.  The symmetry gate is
  checked explicitly and a failed gate never yields uniqueness evidence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ConservationLaw,
    PreconditionError,
    Trajectory,
    ValidationError,
    VectorField,
    as_points,
    as_state,
    eval_jacobian,
)

GRAD_TOL = 1e-8
DET_TOL = 1e-8
DET_FLOOR = 1e-12
KERNEL_TOL = 1e-8
SYMMETRY_TOL = 1e-8
ANGLE_TOL = 1e-3

EVIDENCE = "uniqueness-evidence"
INCONCLUSIVE = "inconclusive"
MARGINAL = "numerically marginal"
GATE_FAILED = "gate failed"


class TooFewLocalSamplesError(ValidationError):
    pass


def _check_law(H: ConservationLaw, F: VectorField) -> None:
    if H.dim != F.dim:
        raise ValidationError(f"law {H.law_id} has dim {H.dim}, field {F.field_id} has dim {F.dim}")


def _det_verdict(det: float) -> str:
    a = abs(det)
    if a >= DET_TOL:
        return EVIDENCE
    if a >= DET_FLOOR:
        return MARGINAL
    return INCONCLUSIVE


@dataclass(frozen=True)
class HessianReport:
    law_id: str
    field_id: str
    witness: tuple[float, ...]
    witness_det: float
    grad_norm: float
    min_abs_det: float
    max_abs_det: float
    n_points: int
    verdict: str
    dets: tuple[float, ...] = field(repr=False, default=())
    tolerances: dict = field(default_factory=lambda: {"grad": GRAD_TOL, "det": DET_TOL, "det_floor": DET_FLOOR})

    def to_dict(self) -> dict:
        return {
            "test": "hessian",
            "law_id": self.law_id,
            "field_id": self.field_id,
            "witness": list(self.witness),
            "witness_det": self.witness_det,
            "grad_norm": self.grad_norm,
            "min_abs_det": self.min_abs_det,
            "max_abs_det": self.max_abs_det,
            "n_points": self.n_points,
            "verdict": self.verdict,
            "tolerances": dict(self.tolerances),
        }


def hessian_test(H: ConservationLaw, F: VectorField, points) -> HessianReport:
    """Stationarity of ``H`` in ``v`` along the data, then the best Hessian witness.

    Raises :class:`PreconditionError` (naming the worst point) if
    ``|grad_v H(F(u_i), u_i)| > 1e-8`` anywhere.  The witness is the point
    with the largest ``|det grad_v^2 H|``; the verdict is uniqueness
    evidence when that determinant is at least 1e-8, "numerically
    marginal" in ``[1e-12, 1e-8)`` and inconclusive below.
    """
    _check_law(H, F)
    pts = as_points(points, F.dim)
    vel = F(pts)
    grads = np.linalg.norm(H.grad_v(vel, pts), axis=-1)
    worst = int(np.argmax(grads))
    if grads[worst] > GRAD_TOL:
        raise PreconditionError(
            f"grad_v H = {grads[worst]:.3g} at u = {pts[worst].tolist()}: "
            f"law {H.law_id} is not stationary along {F.field_id}"
        )
    dets = np.linalg.det(H.hess_v(vel, pts))
    best = int(np.argmax(np.abs(dets)))
    return HessianReport(
        H.law_id, F.field_id, tuple(map(float, pts[best])), float(dets[best]), float(grads.max()),
        float(np.min(np.abs(dets))), float(np.abs(dets[best])), pts.shape[0],
        _det_verdict(float(dets[best])), tuple(map(float, dets)),
    )


@dataclass(frozen=True)
class SymmetryClass:
    cls: str  # "symmetric" | "skew" | "neither"
    max_asymmetry: float
    sym_defect: float
    skew_defect: float
    probes: int

    def to_dict(self) -> dict:
        return {"class": self.cls, "max_asymmetry": self.max_asymmetry, "sym_defect": self.sym_defect,
                "skew_defect": self.skew_defect, "probes": self.probes, "tol": SYMMETRY_TOL}

    @property
    def passes(self) -> bool:
        return self.cls in ("symmetric", "skew")


def symmetry_class(F: VectorField, probes: int = 10, seed: int = 0, lower=None, upper=None) -> SymmetryClass:
    """Classify the Jacobian of ``F`` as symmetric, skew or neither.

    Probes are uniform in the box ``[lower, upper]`` (default ``[-1, 1]^d``).
    The defects are worst-case ``|J - J^T| / |J|`` and ``|J + J^T| / |J|``
    (Frobenius norms); probes where ``J = 0`` contribute nothing.
    """
    if probes < 10:
        raise ValidationError("symmetry_class needs probes >= 10")
    d = F.dim
    lower = -np.ones(d) if lower is None else as_state(lower, d)
    upper = np.ones(d) if upper is None else as_state(upper, d)
    rng = np.random.default_rng(seed)
    pts = lower + rng.random((probes, d)) * (upper - lower)
    J = np.stack([eval_jacobian(F, p) for p in pts])
    norms = np.linalg.norm(J, axis=(1, 2))
    nz = norms > 0
    if not nz.any():
        return SymmetryClass("symmetric", 0.0, 0.0, 0.0, probes)
    Jt = np.swapaxes(J, 1, 2)
    sym = float(np.max(np.linalg.norm(J - Jt, axis=(1, 2))[nz] / norms[nz]))
    skew = float(np.max(np.linalg.norm(J + Jt, axis=(1, 2))[nz] / norms[nz]))
    if sym <= SYMMETRY_TOL:
        return SymmetryClass("symmetric", sym, sym, skew, probes)
    if skew <= SYMMETRY_TOL:
        return SymmetryClass("skew", skew, sym, skew, probes)
    return SymmetryClass("neither", min(sym, skew), sym, skew, probes)


@dataclass(frozen=True)
class KernelInclusionReport:
    law_id: str
    field_id: str
    point: tuple[float, ...]
    ker_dim: int
    tangent_dim: int
    max_principal_angle: float
    inclusion: bool
    gate: SymmetryClass
    verdict: str
    n_local: int
    radius: float
    hessian_singular_values: tuple[float, ...]
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "test": "kernel_inclusion",
            "law_id": self.law_id,
            "field_id": self.field_id,
            "point": list(self.point),
            "ker_dim": self.ker_dim,
            "tangent_dim": self.tangent_dim,
            "max_principal_angle": self.max_principal_angle,
            "inclusion": self.inclusion,
            "gate": self.gate.to_dict(),
            "verdict": self.verdict,
            "n_local": self.n_local,
            "radius": self.radius,
            "hessian_singular_values": list(self.hessian_singular_values),
            "tolerances": {"kernel": KERNEL_TOL, "angle": ANGLE_TOL, "pca_variance": 0.99},
            "notes": list(self.notes),
        }


def tangent_space(samples: np.ndarray, variance: float = 0.99) -> np.ndarray:
    """Orthonormal columns spanning the leading principal components."""
    centred = samples - samples.mean(axis=0)
    _, s, vt = np.linalg.svd(centred, full_matrices=False)
    var = s ** 2
    total = var.sum()
    if total == 0:
        return np.zeros((samples.shape[1], 0))
    k = int(np.searchsorted(np.cumsum(var) / total, variance - 1e-12) + 1)
    return vt[:k].T


def max_principal_angle(K: np.ndarray, T: np.ndarray) -> float:
    """Largest angle between span(K) and its projection onto span(T).

    ``K`` and ``T`` have orthonormal columns.  Zero when ``K`` is empty;
    pi/2 when ``K`` cannot fit inside ``T``.
    """
    if K.shape[1] == 0:
        return 0.0
    if K.shape[1] > T.shape[1]:
        return math.pi / 2
    resid = K - T @ (T.T @ K)
    s = np.linalg.norm(resid, ord=2)
    return float(math.asin(min(1.0, s)))


def kernel_inclusion_test(H: ConservationLaw, F: VectorField, traj: Trajectory, p, r: float = 0.05,
                          min_local: int | None = None, gate_probes: int = 10,
                          seed: int = 0) -> KernelInclusionReport:
    """Is ``ker grad_v^2 H(F(p), p)`` inside the data's tangent space at ``p``?

    The kernel keeps right singular vectors with ``sigma / sigma_max <= 1e-8``.
    The tangent space comes from PCA of trajectory samples within `r` of
    `p` (components up to 99% of variance).  Inclusion means a largest
    principal angle of at most 1e-3 rad.  The verdict is uniqueness
    evidence only when inclusion holds and the Jacobian of ``F`` is
    symmetric or skew-symmetric; with any other Jacobian it is "gate failed".
    """
    _check_law(H, F)
    d = F.dim
    p = as_state(p, d)
    states = traj.states
    if states.shape[1] != d:
        raise ValidationError("trajectory and field dimensions differ")
    dist = np.linalg.norm(states - p, axis=1)
    if dist.min() > 1e-3:
        raise PreconditionError(f"p = {p.tolist()} is {dist.min():.3g} from the nearest sample (> 1e-3)")
    local = states[dist <= r]
    need = max(2 * d + 1, 10) if min_local is None else min_local
    if local.shape[0] < need:
        raise TooFewLocalSamplesError(
            f"only {local.shape[0]} samples within r={r} of p (need {need}); try a larger r"
        )

    C = H.hess_v(F(p), p)
    _, s, vt = np.linalg.svd(C)
    smax = s[0]
    kmask = (s / smax <= KERNEL_TOL) if smax > 0 else np.ones_like(s, bool)
    K = vt[kmask].T
    T = tangent_space(local)
    angle = max_principal_angle(K, T)
    inclusion = angle <= ANGLE_TOL

    lo = p - np.maximum(1.0, np.ptp(states, axis=0) / 2)
    hi = p + np.maximum(1.0, np.ptp(states, axis=0) / 2)
    gate = symmetry_class(F, gate_probes, seed, lo, hi)
    notes = []
    if K.shape[1] == 0:
        notes.append("Hessian has full rank: inclusion holds trivially")
    if not gate.passes:
        verdict = GATE_FAILED
        notes.append("Jacobian is neither symmetric nor skew-symmetric; kernel inclusion is not sufficient")
    elif inclusion:
        verdict = EVIDENCE
    else:
        verdict = INCONCLUSIVE
    return KernelInclusionReport(
        H.law_id, F.field_id, tuple(map(float, p)), int(K.shape[1]), int(T.shape[1]), angle, inclusion,
        gate, verdict, int(local.shape[0]), float(r), tuple(map(float, s)), tuple(notes),
    )
