"""Command-line interface.

Exit codes: 0 success, 2 validation error (bad input or configuration),
3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .analysis import AnalysisConfig, analyze
from .conservation import hessian_test, kernel_inclusion_test
from .core import Domain, NumericalError, Trajectory, ValidationError
from .coverage import cell_decomposition, density_over_schedule, transitivity_graph
from .dimension import box_counting_dimension, correlation_dimension, dimension_criterion
from .ideal import find_vanishing, first_integral_search, probe_points
from .integrate import IntegratorConfig, flow
from .report import report, write_coverage, write_json, write_scales, write_table

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("discoverability")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from exc


def _params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"--param expects key=value, got {item!r}")
        out[key.strip()] = float(value)
    return out


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _out_path(args, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else Path(args.out_dir) / p


def _integrator(args, conf: dict) -> IntegratorConfig:
    base = dict(conf.get("integrator", {}))
    for flag, key in (("t_end", "t_end"), ("t_burn", "t_burn"), ("dt", "dt_sample"),
                      ("rel_tol", "rel_tol"), ("abs_tol", "abs_tol"), ("max_step", "max_step")):
        value = getattr(args, flag, None)
        if value is not None:
            base[key] = value
    return IntegratorConfig.from_dict(base)


def _trajectories(args) -> list[Trajectory]:
    if not args.traj:
        raise ValidationError("at least one --traj file is required")
    return [Trajectory.from_csv(p) for p in args.traj]


def _domain(args, points: np.ndarray) -> Domain:
    if args.domain:
        return Domain.parse(args.domain)
    if getattr(args, "system", None):
        return catalog.entry(args.system).default_domain()
    return Domain.bounding(points)


def _emit(args, data: dict, default_name: str) -> None:
    path = write_json(data, _out_path(args, args.out or default_name))
    print(path)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args, conf) -> None:
    system = args.system or conf.get("system")
    if system is None:
        raise ValidationError("simulate needs --system")
    params = {**conf.get("params", {}), **_params(args.param)}
    F = catalog.get(system, params)
    x0 = _floats(args.x0) if args.x0 else list(conf.get("x0", [catalog.entry(system).default_x0])[0])
    traj = flow(F, x0, _integrator(args, conf))
    path = _out_path(args, args.out or "traj.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    traj.to_csv(path)
    print(path)


def cmd_coverage(args, conf) -> None:
    trajs = _trajectories(args)
    pts = np.vstack([t.states for t in trajs])
    domain = _domain(args, pts)
    eps = _floats(args.eps) if args.eps else list(np.array([0.25, 0.1, 0.05]) * np.exp(np.mean(np.log(domain.extent))))
    verdict, covers = density_over_schedule(pts, domain, eps)
    graph = transitivity_graph(trajs, domain, eps[-1])
    write_coverage(_out_path(args, "coverage.csv"), covers)
    _emit(args, {"density": verdict.to_dict(), "covers": [c.to_dict() for c in covers],
                 "transitivity": graph.to_dict(), "domain": domain.to_list()}, "coverage.json")


def cmd_dimension(args, conf) -> None:
    pts = np.vstack([t.states for t in _trajectories(args)])
    out = {}
    if args.method in ("box", "both"):
        est = box_counting_dimension(pts, _floats(args.scales) if args.scales else None)
        write_scales(_out_path(args, "scales.csv"), est)
        out["box_counting"] = {**est.to_dict(), "criterion": dimension_criterion(est, pts.shape[1]).to_dict()}
    if args.method in ("correlation", "both"):
        est = correlation_dimension(pts, seed=args.seed)
        write_table(_out_path(args, "correlation.csv"), ["r", "fraction"], est.table())
        out["correlation"] = {**est.to_dict(), "criterion": dimension_criterion(est, pts.shape[1]).to_dict()}
    _emit(args, out, "dimension.json")


def cmd_vanishing(args, conf) -> None:
    pts = np.vstack([t.states for t in _trajectories(args)])
    certs = find_vanishing(pts, args.degree, args.tol)
    _emit(args, {"degree": args.degree, "tol": args.tol, "n_samples": int(pts.shape[0]),
                 "certificates": [c.to_dict() for c in certs],
                 "scope": f"polynomials up to degree {args.degree}"}, "certs.json")


def cmd_first_integral(args, conf) -> None:
    F = catalog.get(args.system, _params(args.param))
    domain = _domain(args, np.zeros((1, F.dim)))
    pts = probe_points(domain.lower, domain.upper, args.probes, args.seed)
    if args.traj:
        pts = np.vstack([pts] + [t.states for t in _trajectories(args)])
    search = first_integral_search(F, pts, args.degree, args.tol, seed=args.seed)
    out = search.to_dict()
    if search.certificate is not None:
        out["canonical"] = search.certificate.canonical().format()
    _emit(args, out, "fi.json")


def cmd_conservation(args, conf) -> None:
    F = catalog.get(args.system, _params(args.param))
    H = catalog.get_law(args.law)
    trajs = _trajectories(args)
    pts = np.vstack([t.states for t in trajs])
    out = {"hessian": hessian_test(H, F, pts[:: max(1, pts.shape[0] // 1000)]).to_dict()}
    if args.point:
        out["kernel_inclusion"] = kernel_inclusion_test(H, F, trajs[0], _floats(args.point), args.radius,
                                                        seed=args.seed).to_dict()
    _emit(args, out, "cons.json")


def cmd_cells(args, conf) -> None:
    trajs = _trajectories(args)
    pts = np.vstack([t.states for t in trajs])
    domain = _domain(args, pts)
    if args.eps is None:
        raise ValidationError("decompose-cells needs --eps")
    _emit(args, cell_decomposition(trajs, domain, args.eps).to_dict(), "cells.json")


def cmd_analyze(args, conf) -> None:
    data = {k: v for k, v in conf.items() if k not in ("out_dir",)}
    if args.system:
        data["system"] = args.system
    if args.traj:
        data["trajectories"] = list(args.traj)
    if args.param:
        data["params"] = {**data.get("params", {}), **_params(args.param)}
    if args.x0:
        data["x0"] = [_floats(x) for x in args.x0]
    if args.degree is not None:
        data["degree"] = args.degree
    if args.function_class:
        data["function_class"] = args.function_class
    if args.law:
        data["laws"] = [{"law": law, "point": _floats(args.point) if args.point else None} for law in args.law]
    data["seed"] = args.seed
    verdict = analyze(AnalysisConfig.from_dict(data))
    for path in report(verdict, args.out_dir, plots=not args.no_plots):
        print(path)
    print(f"overall: {verdict.overall}")


def cmd_catalog(args, conf) -> None:
    from .report import dumps

    if args.what == "laws":
        sys.stdout.write(dumps([{"id": i, "formula": catalog.get_law(i).formula} for i in catalog.law_ids()]))
    else:
        sys.stdout.write(dumps(catalog.listing()))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def common(default):
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--seed", type=int, default=default, help="seed for all randomness (default 0)")
        p.add_argument("--config", default=default, help="TOML file with defaults")
        p.add_argument("--out-dir", default=default, help="directory for outputs (default .)")
        p.add_argument("-v", "--verbose", action="store_true", default=default or False)
        return p

    # global flags may come before or after the subcommand
    parser = argparse.ArgumentParser(prog="discoverability", parents=[common(None)],
                                     description="Discoverability analysis of dynamical systems.")
    sub_common = common(argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[sub_common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, "integrate a catalog system and write a trajectory CSV")
    p.add_argument("--system")
    p.add_argument("--param", action="append", help="key=value parameter override")
    p.add_argument("--x0")
    p.add_argument("--t-end", type=float)
    p.add_argument("--t-burn", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--max-step", type=float)
    p.add_argument("--out")

    p = add("analyze-coverage", cmd_coverage, "density and transitivity of trajectory images")
    p.add_argument("--traj", action="append")
    p.add_argument("--system")
    p.add_argument("--domain", help="lo,hi;lo,hi;...")
    p.add_argument("--eps", help="comma-separated decreasing box sizes")
    p.add_argument("--out")

    p = add("estimate-dimension", cmd_dimension, "box-counting / correlation dimension")
    p.add_argument("--traj", action="append")
    p.add_argument("--method", choices=["box", "correlation", "both"], default="both")
    p.add_argument("--scales", help="box sizes in rescaled units")
    p.add_argument("--out")

    p = add("find-vanishing", cmd_vanishing, "polynomials vanishing on the samples")
    p.add_argument("--traj", action="append")
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")

    p = add("find-first-integral", cmd_first_integral, "polynomial first integral of a catalog field")
    p.add_argument("--system", required=True)
    p.add_argument("--param", action="append")
    p.add_argument("--traj", action="append")
    p.add_argument("--domain")
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--probes", type=int, default=5000)
    p.add_argument("--out")

    p = add("check-conservation", cmd_conservation, "Hessian and kernel-inclusion tests for a law")
    p.add_argument("--system", required=True)
    p.add_argument("--param", action="append")
    p.add_argument("--law", required=True)
    p.add_argument("--traj", action="append")
    p.add_argument("--point")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--out")

    p = add("decompose-cells", cmd_cells, "split trajectories into invariant components")
    p.add_argument("--traj", action="append")
    p.add_argument("--system")
    p.add_argument("--domain")
    p.add_argument("--eps", type=float)
    p.add_argument("--out")

    p = add("analyze", cmd_analyze, "full pipeline and verdict report")
    p.add_argument("--system")
    p.add_argument("--param", action="append")
    p.add_argument("--traj", action="append")
    p.add_argument("--x0", action="append")
    p.add_argument("--degree", type=int)
    p.add_argument("--function-class", choices=["analytic", "c0"])
    p.add_argument("--law", action="append")
    p.add_argument("--point")
    p.add_argument("--no-plots", action="store_true")

    p = add("catalog", cmd_catalog, "list catalog systems or laws")
    p.add_argument("what", choices=["list", "laws"])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        conf = _load_config(args.config)
        if args.seed is None:
            args.seed = int(conf.get("seed", 0))
        if args.out_dir is None:
            args.out_dir = conf.get("out_dir", ".")
        args.func(args, conf)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
