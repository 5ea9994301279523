"""Grid-resolution evidence for discoverability in the continuous class.

A trajectory determines a continuous field only where its samples are
dense, so everything here is about which cells of an eps-grid a finite
sample visits, how visits chain together in time, and how several
trajectories split the domain into invariant pieces.  All of it is
resolution-bounded evidence; every result records eps and point counts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Domain, Trajectory, ValidationError, as_points

log = logging.getLogger(__name__)

LONG_JUMP_CELLS = 3


class EmptyCoverError(ValidationError):
    pass


@dataclass(frozen=True, eq=False)
class BoxCover:
    """Occupied cells of the eps-grid anchored at ``domain.lower``."""

    domain: Domain
    eps: float
    cells_per_axis: np.ndarray
    keys: np.ndarray  # sorted flat cell ids
    n_points: int
    n_outside: int
    warnings: tuple[str, ...] = ()

    @property
    def total_cells(self) -> int:
        return int(np.prod(self.cells_per_axis))

    @property
    def coverage_fraction(self) -> float:
        return self.keys.shape[0] / self.total_cells

    @property
    def occupied(self) -> np.ndarray:
        """Occupied cells as integer index rows, shape ``(k, d)``."""
        return unflatten(self.keys, self.cells_per_axis)

    def occupied_set(self) -> set[tuple[int, ...]]:
        return {tuple(int(i) for i in row) for row in self.occupied}

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "cells_per_axis": self.cells_per_axis.tolist(),
            "occupied": int(self.keys.shape[0]),
            "total_cells": self.total_cells,
            "coverage_fraction": self.coverage_fraction,
            "n_points": self.n_points,
            "n_outside": self.n_outside,
            "warnings": list(self.warnings),
        }


def grid_shape(domain: Domain, eps: float) -> np.ndarray:
    return np.maximum(1, np.ceil(domain.extent / eps - 1e-9)).astype(np.int64)


def flatten(idx: np.ndarray, cells: np.ndarray) -> np.ndarray:
    key = np.zeros(idx.shape[0], dtype=np.int64)
    for j in range(idx.shape[1]):
        key = key * cells[j] + idx[:, j]
    return key


def unflatten(keys: np.ndarray, cells: np.ndarray) -> np.ndarray:
    out = np.empty((keys.shape[0], cells.shape[0]), dtype=np.int64)
    rest = keys.astype(np.int64)
    for j in range(cells.shape[0] - 1, -1, -1):
        out[:, j] = rest % cells[j]
        rest = rest // cells[j]
    return out


def cell_keys(points, domain: Domain, eps: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-point cell keys, the inside mask and the grid shape."""
    pts = as_points(points, domain.dim)
    cells = grid_shape(domain, eps)
    inside = domain.contains(pts)
    idx = np.floor((pts - domain.lower) / eps).astype(np.int64)
    idx = np.clip(idx, 0, cells - 1)  # points on the upper face go to the last cell
    return flatten(idx, cells), inside, cells


def box_cover(points, domain: Domain, eps: float) -> BoxCover:
    if not eps > 0:
        raise ValidationError("eps must be positive")
    warnings = []
    if np.all(eps >= domain.extent):
        warnings.append(f"eps={eps:g} exceeds the domain extent; single-cell cover")
        log.warning(warnings[-1])
    keys, inside, cells = cell_keys(points, domain, eps)
    n_out = int((~inside).sum())
    if n_out:
        warnings.append(f"{n_out} points outside the domain were ignored")
    return BoxCover(domain, float(eps), cells, np.unique(keys[inside]), int(inside.shape[0]), n_out,
                    tuple(warnings))


@dataclass(frozen=True)
class DensityVerdict:
    verdict: str  # "dense-evidence" | "non-dense"
    eps_schedule: tuple[float, ...]
    coverage_fractions: tuple[float, ...]
    n_points: int
    tol_frac: float
    first_failing_eps: float | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "eps_schedule": list(self.eps_schedule),
            "coverage_fractions": list(self.coverage_fractions),
            "n_points": self.n_points,
            "tol_frac": self.tol_frac,
            "first_failing_eps": self.first_failing_eps,
        }


def density_verdict(covers: Sequence[BoxCover], tol_frac: float = 1e-3) -> DensityVerdict:
    """Dense evidence iff every level covers at least ``1 - tol_frac`` of the grid."""
    eps = np.array([c.eps for c in covers])
    if eps.shape[0] < 3 or not np.all(np.diff(eps) < 0):
        raise ValidationError("density_verdict needs >= 3 covers with strictly decreasing eps")
    fracs = tuple(c.coverage_fraction for c in covers)
    failing = next((c.eps for c in covers if c.coverage_fraction < 1.0 - tol_frac), None)
    return DensityVerdict(
        "dense-evidence" if failing is None else "non-dense",
        tuple(map(float, eps)), fracs, max(c.n_points for c in covers), tol_frac, failing,
    )


def density_over_schedule(points, domain: Domain, eps_schedule, tol_frac: float = 1e-3):
    covers = [box_cover(points, domain, e) for e in eps_schedule]
    return density_verdict(covers, tol_frac), covers


# ---------------------------------------------------------------------------
# box graph and strongly connected components


def strongly_connected_components(n: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Tarjan's algorithm (iterative). Returns a component label per node."""
    order = np.argsort(src, kind="stable")
    dst_sorted = dst[order]
    start = np.searchsorted(src[order], np.arange(n + 1))
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    label = np.full(n, -1, dtype=np.int64)
    stack: list[int] = []
    counter = 0
    n_comp = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, start[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            if pos < start[v + 1]:
                work[-1] = (v, pos + 1)
                w = int(dst_sorted[pos])
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, start[w]))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    label[w] = n_comp
                    if w == v:
                        break
                n_comp += 1
    return label


@dataclass(frozen=True, eq=False)
class TransitivityGraph:
    eps: float
    cells_per_axis: np.ndarray
    nodes: np.ndarray  # visited cell keys, sorted
    edges: np.ndarray  # (m, 2) node positions, unique
    scc_labels: np.ndarray
    long_jumps: int
    total_cells: int
    warnings: tuple[str, ...] = ()

    @property
    def n_sccs(self) -> int:
        return int(self.scc_labels.max()) + 1 if self.scc_labels.size else 0

    @property
    def single_scc(self) -> bool:
        return self.n_sccs == 1

    @property
    def covers_grid(self) -> bool:
        return self.nodes.shape[0] == self.total_cells

    def scc_sizes(self) -> list[int]:
        return sorted(np.bincount(self.scc_labels).tolist(), reverse=True)

    def to_dict(self) -> dict:
        sizes = self.scc_sizes()
        return {
            "eps": self.eps,
            "visited_boxes": int(self.nodes.shape[0]),
            "edges": int(self.edges.shape[0]),
            "n_sccs": self.n_sccs,
            "single_scc": self.single_scc,
            "largest_scc": sizes[0] if sizes else 0,
            "covers_grid": self.covers_grid,
            "long_jumps": self.long_jumps,
            "warnings": list(self.warnings),
        }


def transitivity_graph(trajectories: Sequence[Trajectory], domain: Domain, eps: float) -> TransitivityGraph:
    """Directed graph of cell-to-cell passages between consecutive samples.

    SCCs are computed over visited cells only.  Passages longer than
    three cells (Chebyshev) still create edges but are counted as
    undersampling warnings.
    """
    if not trajectories:
        raise ValidationError("need at least one trajectory")
    cells = grid_shape(domain, eps)
    all_keys, src_keys, dst_keys = [], [], []
    long_jumps = 0
    for traj in trajectories:
        keys, inside, _ = cell_keys(traj.states, domain, eps)
        all_keys.append(keys[inside])
        step = inside[:-1] & inside[1:] & (keys[:-1] != keys[1:])
        a, b = keys[:-1][step], keys[1:][step]
        if a.size:
            jump = np.abs(unflatten(a, cells) - unflatten(b, cells)).max(axis=1)
            long_jumps += int((jump > LONG_JUMP_CELLS).sum())
        src_keys.append(a)
        dst_keys.append(b)
    nodes = np.unique(np.concatenate(all_keys))
    if nodes.size == 0:
        raise EmptyCoverError("no samples fall inside the domain")
    src = np.searchsorted(nodes, np.concatenate(src_keys))
    dst = np.searchsorted(nodes, np.concatenate(dst_keys))
    edges = np.unique(np.stack([src, dst], axis=1), axis=0) if src.size else np.zeros((0, 2), np.int64)
    labels = strongly_connected_components(nodes.shape[0], edges[:, 0], edges[:, 1])
    warnings = []
    if long_jumps:
        warnings.append(f"{long_jumps} passages jump more than {LONG_JUMP_CELLS} cells; sampling may be too coarse")
    return TransitivityGraph(float(eps), cells, nodes, edges, labels, long_jumps,
                             int(np.prod(cells)), tuple(warnings))


# ---------------------------------------------------------------------------
# cell decomposition


@dataclass(frozen=True, eq=False)
class Component:
    boxes: np.ndarray
    trajectories: tuple[int, ...]
    transitive: bool
    n_sccs: int


@dataclass(frozen=True, eq=False)
class CellDecomposition:
    eps: float
    components: tuple[Component, ...]
    covers_domain: bool
    coverage_fraction: float
    is_transitive_whole: bool
    tol_frac: float

    @property
    def every_component_transitive(self) -> bool:
        return all(c.transitive for c in self.components)

    @property
    def status(self) -> str:
        if not self.covers_domain:
            return "not finitely discoverable at this resolution"
        if self.every_component_transitive:
            return "finitely discoverable evidence: covering transitive cells"
        return "covering, but some cells are not transitive at this resolution"

    def membership(self) -> list[int]:
        out = {}
        for ci, comp in enumerate(self.components):
            for t in comp.trajectories:
                out[t] = ci
        return [out[t] for t in sorted(out)]

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "n_components": len(self.components),
            "components": [
                {"trajectories": list(c.trajectories), "boxes": int(c.boxes.shape[0]),
                 "transitive": c.transitive, "n_sccs": c.n_sccs}
                for c in self.components
            ],
            "membership": self.membership(),
            "covers_domain": self.covers_domain,
            "coverage_fraction": self.coverage_fraction,
            "is_transitive_whole": self.is_transitive_whole,
            "status": self.status,
        }


def cell_decomposition(trajectories: Sequence[Trajectory], domain: Domain, eps: float,
                       tol_frac: float = 1e-3) -> CellDecomposition:
    """Group trajectories whose grid covers intersect; test covering and transitivity."""
    if not trajectories:
        raise ValidationError("need at least one trajectory")
    covers = [box_cover(t.states, domain, eps) for t in trajectories]
    parent = list(range(len(covers)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(covers)):
        for j in range(i + 1, len(covers)):
            if find(i) != find(j) and np.intersect1d(covers[i].keys, covers[j].keys).size:
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(len(covers)):
        groups.setdefault(find(i), []).append(i)
    components = []
    for members in sorted(groups.values()):
        boxes = np.unique(np.concatenate([covers[m].keys for m in members]))
        if boxes.size:
            graph = transitivity_graph([trajectories[m] for m in members], domain, eps)
            transitive, n_sccs = graph.single_scc, graph.n_sccs
        else:
            transitive, n_sccs = False, 0
        components.append(Component(boxes, tuple(members), transitive, n_sccs))
    total = covers[0].total_cells
    union = np.unique(np.concatenate([c.keys for c in covers]))
    frac = union.size / total
    covering = frac >= 1.0 - tol_frac
    whole = len(components) == 1 and components[0].transitive
    return CellDecomposition(float(eps), tuple(components), covering, frac, whole, tol_frac)


__all__ = [
    "BoxCover", "box_cover", "density_verdict", "density_over_schedule", "DensityVerdict",
    "TransitivityGraph", "transitivity_graph", "strongly_connected_components",
    "CellDecomposition", "Component", "cell_decomposition", "EmptyCoverError",
]
