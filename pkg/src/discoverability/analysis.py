"""End-to-end discoverability analysis: simulate, measure, certify, decide.

The overall verdict follows a fixed precedence:

1. a first-integral certificate makes the system non-discoverable from
   any single trajectory (certified);
2. a vanishing polynomial whose alternative field verifiably differs off
   the samples also certifies non-discoverability, up to the searched degree;
3. otherwise, density (continuous class) or a passing dimension criterion
   or an empty vanishing ideal (analytic class) count as evidence for
   discoverability;
4. anything else is inconclusive.

Certificates are constructive; discoverability is only ever "evidence".
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import catalog
from .conservation import hessian_test, kernel_inclusion_test
from .core import (
    DiscoverabilityError,
    Domain,
    PolynomialField,
    PreconditionError,
    Trajectory,
    ValidationError,
    VectorField,
)
from .coverage import density_over_schedule, transitivity_graph
from .dimension import (
    MIN_POINTS,
    box_counting_dimension,
    correlation_dimension,
    dimension_criterion,
)
from .ideal import (
    DegreeOverflowError,
    alternative_field,
    find_vanishing,
    first_integral_search,
    probe_points,
)
from .integrate import IntegratorConfig, flow
from .polynomial import MonomialBasis

log = logging.getLogger(__name__)

DISCOVERABLE = "discoverable-evidence"
CERTIFIED = "non-discoverable-certified"
INCONCLUSIVE = "inconclusive"

CHAOTIC_BURN = 100.0


@dataclass(frozen=True)
class LawCheck:
    law: str
    point: tuple[float, ...] | None = None
    radius: float = 0.05


@dataclass(frozen=True)
class AnalysisConfig:
    system: str | None = None
    params: dict = field(default_factory=dict)
    trajectories: tuple[str, ...] = ()
    x0: tuple[tuple[float, ...], ...] = ()
    function_class: str = "analytic"
    degree: int = 4
    vanishing_degree: int | None = None
    vanishing_tol: float = 1e-8
    first_integral_tol: float = 1e-6
    eps_fractions: tuple[float, ...] = (0.25, 0.1, 0.05)
    density_tol: float = 1e-3
    domain: tuple[tuple[float, float], ...] | None = None
    dimension: bool = True
    first_integral_probes: int = 5000
    max_alternative_degree: int = 12
    laws: tuple[LawCheck, ...] = ()
    integrator: IntegratorConfig | None = None
    seed: int = 0

    def __post_init__(self):
        if self.system is None and not self.trajectories:
            raise ValidationError("config needs a system id or trajectory files")
        if self.function_class not in ("analytic", "c0"):
            raise ValidationError(f"function_class must be 'analytic' or 'c0', got {self.function_class!r}")
        if self.function_class == "c0" and self.laws:
            raise ValidationError("conservation-law tests apply to the analytic class, not c0")
        if self.degree < 1 or (self.vanishing_degree is not None and self.vanishing_degree < 1):
            raise ValidationError("degrees must be >= 1")
        fr = self.eps_fractions
        if len(fr) < 3 or any(b >= a for a, b in zip(fr, fr[1:])) or fr[-1] <= 0:
            raise ValidationError("eps_fractions needs >= 3 positive, strictly decreasing values")
        if self.system is not None:
            catalog.entry(self.system)

    @property
    def search_degree(self) -> int:
        return self.vanishing_degree or self.degree

    def resolved_integrator(self) -> IntegratorConfig:
        """Integrator settings; transients are burned only for chaotic attractors."""
        if self.integrator is not None:
            return self.integrator
        burn = 0.0
        if self.system is not None and catalog.entry(self.system).properties.get("chaotic-attractor"):
            burn = CHAOTIC_BURN
        return IntegratorConfig(t_end=500.0, t_burn=burn)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["params"] = dict(self.params)
        out["trajectories"] = list(self.trajectories)
        out["x0"] = [list(x) for x in self.x0]
        out["eps_fractions"] = list(self.eps_fractions)
        out["domain"] = None if self.domain is None else [list(b) for b in self.domain]
        out["laws"] = [{"law": c.law, "point": None if c.point is None else list(c.point), "radius": c.radius}
                       for c in self.laws]
        out["integrator"] = self.resolved_integrator().to_dict()
        return out

    @classmethod
    def from_dict(cls, data) -> "AnalysisConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        if data.get("integrator") is not None and not isinstance(data["integrator"], IntegratorConfig):
            data["integrator"] = IntegratorConfig.from_dict(data["integrator"])
        if "laws" in data:
            laws = []
            for item in data["laws"]:
                if isinstance(item, str):
                    item = {"law": item}
                item = dict(item)
                if item.get("point") is not None:
                    item["point"] = tuple(float(x) for x in item["point"])
                laws.append(LawCheck(**item))
            data["laws"] = tuple(laws)
        for key in ("trajectories", "eps_fractions"):
            if key in data:
                data[key] = tuple(data[key])
        if "x0" in data:
            data["x0"] = tuple(tuple(float(v) for v in x) for x in data["x0"])
        if data.get("domain") is not None:
            data["domain"] = tuple(tuple(float(v) for v in b) for b in data["domain"])
        if "params" in data:
            data["params"] = {k: float(v) for k, v in dict(data["params"]).items()}
        return cls(**data)


@dataclass(eq=False)
class UniquenessVerdict:
    system: str | None
    trajectories: list[dict]
    c0: dict
    analytic: dict | None
    overall: str
    reasons: list[str]
    parameters: dict
    artifacts: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "trajectories": self.trajectories,
            "c0": self.c0,
            "analytic": self.analytic,
            "overall": self.overall,
            "reasons": self.reasons,
            "parameters": self.parameters,
        }


def _load_trajectories(cfg: AnalysisConfig, F: VectorField | None) -> list[Trajectory]:
    if cfg.trajectories:
        return [Trajectory.from_csv(Path(p), field_id=cfg.system) for p in cfg.trajectories]
    e = catalog.entry(cfg.system)
    starts = cfg.x0 or (e.default_x0,)
    icfg = cfg.resolved_integrator()
    return [flow(F, x0, icfg) for x0 in starts]


def _domain(cfg: AnalysisConfig, points: np.ndarray) -> Domain:
    if cfg.domain is not None:
        lo, hi = zip(*cfg.domain)
        return Domain(np.array(lo), np.array(hi))
    if cfg.system is not None:
        return catalog.entry(cfg.system).default_domain()
    return Domain.bounding(points)


def _eps_schedule(cfg: AnalysisConfig, domain: Domain) -> np.ndarray:
    scale = float(np.exp(np.mean(np.log(domain.extent))))
    return np.array(cfg.eps_fractions) * scale


def _c0_block(cfg, trajs, points, domain) -> tuple[dict, dict]:
    eps = _eps_schedule(cfg, domain)
    dv, covers = density_over_schedule(points, domain, eps, cfg.density_tol)
    graph = transitivity_graph(trajs, domain, float(eps[-1]))
    block = {
        "verdict": dv.verdict,
        "eps_schedule": [float(e) for e in eps],
        "coverage_fractions": [float(c.coverage_fraction) for c in covers],
        "density": dv.to_dict(),
        "transitivity": {k: v for k, v in graph.to_dict().items() if k != "scc_sizes"},
        "domain": domain.to_list(),
    }
    return block, {"covers": covers}


def _dimension_block(cfg, points) -> tuple[dict, dict]:
    if points.shape[0] < MIN_POINTS:
        return {"skipped": f"fewer than {MIN_POINTS} samples"}, {}
    corr = correlation_dimension(points, seed=cfg.seed)
    box = box_counting_dimension(points)
    crit = dimension_criterion(corr, points.shape[1])
    return (
        {"correlation": corr.to_dict(), "box_counting": box.to_dict(), "criterion": crit.to_dict()},
        {"correlation": corr, "box_counting": box},
    )


def _unit_field(d: int) -> PolynomialField:
    basis = MonomialBasis(d, 1)
    coeffs = np.zeros((d, len(basis)))
    coeffs[0, 0] = 1.0
    return PolynomialField(basis, coeffs, name="e1")


def _zero_field(d: int) -> PolynomialField:
    return PolynomialField(MonomialBasis(d, 1), np.zeros((d, d + 1)), name="zero")


def _vanishing_block(cfg, F, trajs, points) -> dict:
    rel = [t.rel_tol for t in trajs if t.rel_tol is not None]
    tol = cfg.vanishing_tol
    notes = []
    if rel and tol < 100 * max(rel):
        tol = 100 * max(rel)
        notes.append(f"tolerance raised to 100 x integrator rel_tol = {tol:g}")
    D = cfg.search_degree
    certs = find_vanishing(points, D, tol)
    poly = F.as_polynomial() if F is not None else None
    if poly is not None and not np.any(poly.coeffs):
        poly = None
    if poly is not None:
        base, W, mode = poly, poly, "F + g*F"
    else:
        base, W, mode = _zero_field(points.shape[1]), _unit_field(points.shape[1]), "g*e1 (difference field)"
    out = []
    for c in certs:
        entry = {"certificate": c.to_dict(), "canonical": c.canonical().format()}
        try:
            alt = alternative_field(base, c, W, max_degree=cfg.max_alternative_degree)
            entry["alternative"] = alt.to_dict()
            entry["verified"] = alt.probe_difference >= 1e-3
        except (DegreeOverflowError, DiscoverabilityError) as exc:
            entry["alternative"] = None
            entry["verified"] = False
            entry["error"] = str(exc)
        entry["witness"] = mode
        out.append(entry)
    return {
        "degree": D,
        "tol": tol,
        "n_certificates": len(out),
        "n_verified": sum(e["verified"] for e in out),
        "certificates": out,
        "scope": f"polynomials up to degree {D}",
        "notes": notes,
    }


def _first_integral_block(cfg, F, domain, points) -> dict:
    stride = max(1, points.shape[0] // 5000)
    pts = np.vstack([points[::stride], probe_points(domain.lower, domain.upper, cfg.first_integral_probes, cfg.seed)])
    search = first_integral_search(F, pts, cfg.degree, cfg.first_integral_tol, seed=cfg.seed)
    out = search.to_dict()
    if search.certificate is not None:
        out["canonical"] = search.certificate.canonical().format()
    return out


def _law_block(cfg, F, trajs, points) -> list[dict]:
    reports = []
    stride = max(1, points.shape[0] // 1000)
    for check in cfg.laws:
        H = catalog.get_law(check.law)
        item: dict = {"law": check.law}
        try:
            item["hessian"] = hessian_test(H, F, points[::stride]).to_dict()
        except PreconditionError as exc:
            item["hessian"] = {"verdict": "precondition failed", "error": str(exc)}
        if check.point is not None:
            traj = min(trajs, key=lambda t: float(np.min(np.linalg.norm(t.states - np.asarray(check.point), axis=1))))
            try:
                item["kernel_inclusion"] = kernel_inclusion_test(H, F, traj, check.point, check.radius,
                                                                 seed=cfg.seed).to_dict()
            except ValidationError as exc:
                item["kernel_inclusion"] = {"verdict": "precondition failed", "error": str(exc)}
        reports.append(item)
    return reports


def compose_verdict(function_class: str, c0: dict, analytic: dict | None) -> tuple[str, list[str]]:
    """Apply the certificate > evidence > inconclusive precedence."""
    reasons: list[str] = []
    if analytic is not None:
        fi = analytic.get("first_integral")
        if fi and fi.get("found"):
            reasons.append(f"first integral {fi.get('canonical', '')} (degree <= {fi['degree']}): "
                           "no single trajectory is a set of uniqueness")
        van = analytic.get("vanishing")
        if van and van["n_verified"] > 0:
            reasons.append(f"{van['n_verified']} vanishing polynomial(s) up to degree {van['degree']} "
                           "with an alternative field that differs off the samples")
        if reasons:
            return CERTIFIED, reasons
    if function_class == "c0":
        if c0["verdict"] == "dense-evidence":
            reasons.append("trajectory images cover the domain at every grid scale")
            return DISCOVERABLE, reasons
        reasons.append("trajectory images are not dense at the finest grid scale")
        return INCONCLUSIVE, reasons
    dim = (analytic or {}).get("dimension", {})
    crit = dim.get("criterion")
    if crit and crit["verdict"] == "uniqueness-evidence":
        reasons.append(f"{crit['method']} dimension {crit['value']:.4f} exceeds d-1 = {crit['threshold']} "
                       f"by more than {crit['margin']:.3g}")
    van = (analytic or {}).get("vanishing")
    if van and van["n_certificates"] == 0:
        reasons.append(f"no vanishing polynomial up to degree {van['degree']}")
    if reasons:
        return DISCOVERABLE, reasons
    reasons.append("no certificate and no evidence criterion met")
    return INCONCLUSIVE, reasons


def analyze(cfg: AnalysisConfig) -> UniquenessVerdict:
    """Run the configured pipeline and compose a verdict."""
    F = catalog.get(cfg.system, cfg.params) if cfg.system is not None else None
    trajs = _load_trajectories(cfg, F)
    dims = {t.dim for t in trajs}
    if len(dims) != 1 or (F is not None and dims != {F.dim}):
        raise ValidationError("trajectories and system have inconsistent dimensions")
    points = np.vstack([t.states for t in trajs])
    domain = _domain(cfg, points)
    c0, c0_art = _c0_block(cfg, trajs, points, domain)
    artifacts = {"trajectories": trajs, **c0_art}

    analytic = None
    if cfg.function_class == "analytic":
        analytic = {}
        if cfg.dimension:
            analytic["dimension"], dim_art = _dimension_block(cfg, points)
            artifacts.update(dim_art)
        analytic["vanishing"] = _vanishing_block(cfg, F, trajs, points)
        if F is not None:
            analytic["first_integral"] = _first_integral_block(cfg, F, domain, points)
        else:
            analytic["first_integral"] = None
        if cfg.laws:
            if F is None:
                raise ValidationError("conservation-law tests need a system id")
            analytic["conservation"] = _law_block(cfg, F, trajs, points)
            analytic["conservation_note"] = ("law tests concern the class constrained by the law and are "
                                             "reported alongside, not folded into, the overall verdict")
    overall, reasons = compose_verdict(cfg.function_class, c0, analytic)
    summary = [
        {"source": (cfg.trajectories[i] if cfg.trajectories else "simulated"),
         "origin": [float(v) for v in t.origin] if t.origin is not None else None,
         "x0": [float(v) for v in t.x0], "n_samples": len(t),
         "t_start": float(t.times[0]), "t_end": float(t.times[-1])}
        for i, t in enumerate(trajs)
    ]
    return UniquenessVerdict(cfg.system, summary, c0, analytic, overall, reasons, cfg.to_dict(), artifacts)
