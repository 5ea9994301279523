"""Trajectories of the flow map via an embedded Dormand-Prince 5(4) pair.

Samples are taken on the fixed grid ``t_k = k * dt_sample`` through the
method's continuous extension, so downstream statistics see uniformly
weighted points regardless of the adaptive step sequence.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import _backend
from ._fallback import STATUS_ESCAPE, STATUS_MAX_STEPS, STATUS_STIFF
from .core import Domain, NumericalError, Trajectory, ValidationError, VectorField, as_state


class EscapeError(NumericalError):
    """The state norm exceeded the blow-up bound."""

    def __init__(self, message: str, t: float, last_state: np.ndarray):
        super().__init__(message)
        self.t = t
        self.last_state = last_state


class StiffnessError(NumericalError):
    """The step size underflowed."""

    def __init__(self, message: str, t: float, last_state: np.ndarray):
        super().__init__(message)
        self.t = t
        self.last_state = last_state


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float = 500.0
    t_burn: float = 0.0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    dt_sample: float = 0.01
    max_norm: float = 1e8
    max_steps: int = 100_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValidationError("integrator tolerances must be positive")
        if self.t_burn < 0:
            raise ValidationError("t_burn must be >= 0")
        if not self.t_end > self.t_burn:
            raise ValidationError(f"t_end ({self.t_end}) must exceed t_burn ({self.t_burn})")
        if not self.dt_sample > 0:
            raise ValidationError("dt_sample must be positive")
        if not self.max_step > 0:
            raise ValidationError("max_step must be positive")

    def sample_times(self) -> np.ndarray:
        dt = self.dt_sample
        k_first = math.ceil(self.t_burn / dt - 1e-9)
        k_last = math.floor(self.t_end / dt + 1e-9)
        times = np.arange(k_first, k_last + 1, dtype=float) * dt
        if times.size and abs(times[-1] - self.t_end) <= 1e-9 * max(1.0, self.t_end):
            times[-1] = self.t_end
        return times

    def to_dict(self) -> dict:
        out = asdict(self)
        out["max_step"] = None if math.isinf(self.max_step) else self.max_step
        return out

    @classmethod
    def from_dict(cls, data) -> "IntegratorConfig":
        data = dict(data)
        if data.get("max_step") is None:
            data.pop("max_step", None)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown integrator options: {sorted(unknown)}")
        return cls(**data)


def flow(F: VectorField, x0, cfg: IntegratorConfig | None = None, backend: str | None = None) -> Trajectory:
    """Integrate ``u' = F(u)`` from ``x0`` and sample on the ``dt_sample`` grid.

    Samples before ``cfg.t_burn`` are discarded.  Raises
    :class:`EscapeError` if the norm exceeds ``cfg.max_norm`` and
    :class:`StiffnessError` on step-size underflow.
    """
    cfg = cfg or IntegratorConfig()
    x0 = as_state(x0, F.dim)
    times = cfg.sample_times()
    if times.size < 2:
        raise ValidationError("configuration yields fewer than 2 samples; lower dt_sample")
    out, filled, status, t, y, n_steps, n_rejected = _backend.dopri5(
        F, x0, times, cfg.t_end, cfg.rel_tol, cfg.abs_tol, cfg.max_step, cfg.max_norm,
        cfg.max_steps, backend=backend,
    )
    if status == STATUS_ESCAPE:
        raise EscapeError(f"{F.field_id}: |u| exceeded {cfg.max_norm:g} near t={t:.6g}", t, np.asarray(y))
    if status == STATUS_STIFF:
        raise StiffnessError(f"{F.field_id}: step size underflow at t={t:.6g}", t, np.asarray(y))
    if status == STATUS_MAX_STEPS:
        raise NumericalError(f"{F.field_id}: exceeded {cfg.max_steps} steps at t={t:.6g}")
    return Trajectory(
        times[:filled],
        out[:filled],
        field_id=F.field_id,
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
        origin=x0,
        meta={"t_burn": cfg.t_burn, "n_steps": int(n_steps), "n_rejected": int(n_rejected),
              "backend": _backend.resolve(backend) if F.as_polynomial() is not None else "python"},
    )


def flow_to(F: VectorField, x0, t: float, cfg: IntegratorConfig | None = None,
            backend: str | None = None) -> np.ndarray:
    """State at time ``t`` (``t`` may be negative: integrates ``-F``)."""
    cfg = cfg or IntegratorConfig()
    field_ = F if t >= 0 else F.reversed()
    span = abs(float(t))
    step_cfg = replace(cfg, t_end=span, t_burn=0.0, dt_sample=span)
    return flow(field_, x0, step_cfg, backend=backend).states[-1]


@dataclass
class TrappingReport:
    probes: int
    horizon: float
    fraction_inside: float
    fraction_final_inside: float
    escaped: int
    max_excursion: float
    min_final_margin: float
    trapping: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def boundary_probes(U: Domain, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples on the surface of the box ``U``."""
    d = U.dim
    ext = U.extent
    if d == 1:
        return np.where(rng.random(n) < 0.5, U.lower[0], U.upper[0])[:, None]
    areas = np.array([np.prod(np.delete(ext, j)) for j in range(d)])
    axis = rng.choice(d, size=n, p=areas / areas.sum())
    pts = U.lower + rng.random((n, d)) * ext
    side = rng.random(n) < 0.5
    pts[np.arange(n), axis] = np.where(side, U.lower[axis], U.upper[axis])
    return pts


def check_trapping(F: VectorField, U: Domain, probes: int, horizon: float,
                   cfg: IntegratorConfig | None = None, seed: int = 0,
                   backend: str | None = None) -> TrappingReport:
    """Integrate from boundary probes and report whether they stay in int(U).

    This is evidence only: a finite set of probes over a finite horizon.
    A probe "remains inside" if every sample with ``t > 0`` lies strictly
    inside ``U``; ``fraction_final_inside`` separately counts probes that
    are inside at the horizon (absorbing but not invariant boxes).
    Escapes count as leaving.
    """
    if probes < 1:
        raise ValidationError("probes must be >= 1")
    if U.dim != F.dim:
        raise ValidationError("domain and field dimensions differ")
    base = cfg or IntegratorConfig()
    dt = min(base.dt_sample, horizon / 10)
    run_cfg = replace(base, t_end=horizon, t_burn=0.0, dt_sample=dt)
    rng = np.random.default_rng(seed)
    starts = boundary_probes(U, probes, rng)
    inside = final_inside = escaped = 0
    max_excursion = 0.0
    min_margin = math.inf
    for x0 in starts:
        try:
            traj = flow(F, x0, run_cfg, backend=backend)
        except EscapeError:
            escaped += 1
            max_excursion = math.inf
            continue
        pts = traj.states[1:]
        outside = np.maximum(U.lower - pts, 0.0) + np.maximum(pts - U.upper, 0.0)
        max_excursion = max(max_excursion, float(np.max(np.linalg.norm(outside, axis=1))))
        if np.all(U.contains(pts, strict=True)):
            inside += 1
        final = traj.states[-1]
        final_inside += bool(U.contains(final[None, :], strict=True)[0])
        margin = float(np.min(np.minimum(final - U.lower, U.upper - final)))
        min_margin = min(min_margin, margin)
    frac = inside / probes
    notes = ["evidence only: finite probes over a finite horizon"]
    return TrappingReport(probes, horizon, frac, final_inside / probes, escaped, max_excursion, min_margin, frac == 1.0, notes)
