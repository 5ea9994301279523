import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from discoverability import catalog
from discoverability.core import Domain, Trajectory, ValidationError
from discoverability.coverage import (
    EmptyCoverError,
    box_cover,
    cell_decomposition,
    density_over_schedule,
    density_verdict,
    strongly_connected_components,
    transitivity_graph,
)
from discoverability.integrate import IntegratorConfig, flow

from oracles import box_count, scc_count, scc_partition



def box(pairs):
    pairs = np.asarray(pairs, float)
    return Domain(pairs[:, 0], pairs[:, 1])


UNIT = box([[-1, 1], [-1, 1]])


def as_traj(states):
    states = np.asarray(states, float)
    return Trajectory(np.arange(states.shape[0], dtype=float), states)


def circle_traj(radius, n=4000):
    th = 0.3 + np.linspace(0, 2 * np.pi, n)  # start off the cell corners
    return as_traj(np.c_[radius * np.cos(th), radius * np.sin(th)])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**31), st.floats(0.0, 0.3))
def test_scc_matches_networkx(n, seed, density):
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < density
    src, dst = np.nonzero(mask)
    labels = strongly_connected_components(n, src, dst)
    assert labels.max() + 1 == scc_count(n, src, dst)
    ours = {frozenset(np.flatnonzero(labels == k).tolist()) for k in range(labels.max() + 1)}
    assert ours == scc_partition(n, src, dst)


def test_scc_long_cycle_is_iterative():
    n = 50_000
    src = np.arange(n)
    labels = strongly_connected_components(n, src, (src + 1) % n)
    assert labels.max() == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([0.5, 0.25, 0.1, 0.05]))
def test_box_cover_invariants(seed, eps):
    pts = np.random.default_rng(seed).uniform(-1.2, 1.2, (500, 2))
    cover = box_cover(pts, UNIT, eps)
    inside = UNIT.contains(pts)
    assert cover.n_outside == int((~inside).sum())
    assert 0 <= cover.coverage_fraction <= 1
    assert cover.keys.shape[0] == box_count(pts[inside], eps)
    assert len(cover.occupied_set()) == cover.keys.shape[0]
    # adding points never removes boxes
    more = box_cover(np.vstack([pts, pts * 0.5]), UNIT, eps)
    assert set(cover.keys.tolist()) <= set(more.keys.tolist())


def test_box_cover_validation_and_warnings():
    with pytest.raises(ValidationError):
        box_cover(np.zeros((3, 2)), UNIT, 0.0)
    cover = box_cover(np.zeros((3, 2)), UNIT, 5.0)
    assert cover.total_cells == 1 and cover.warnings


def test_density_dense_and_sparse():
    g = np.linspace(-1, 1, 401)
    grid = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2)
    verdict, covers = density_over_schedule(grid, UNIT, [0.5, 0.1, 0.02])
    assert verdict.verdict == "dense-evidence"
    assert all(c.coverage_fraction == 1.0 for c in covers)
    verdict, _ = density_over_schedule(circle_traj(0.9).states, UNIT, [0.5, 0.1, 0.02])
    assert verdict.verdict == "non-dense" and verdict.first_failing_eps == 0.5


def test_density_schedule_validation():
    covers = [box_cover(np.zeros((1, 2)), UNIT, e) for e in (0.1, 0.5, 0.05)]
    with pytest.raises(ValidationError):
        density_verdict(covers)
    with pytest.raises(ValidationError):
        density_verdict(covers[:2])


def test_transitivity_circle_single_scc():
    g = transitivity_graph([circle_traj(0.8)], UNIT, 0.05)
    assert g.single_scc and not g.covers_grid and g.long_jumps == 0


def test_transitivity_open_path_is_not_transitive():
    x = np.linspace(-0.9, 0.9, 500)
    g = transitivity_graph([as_traj(np.c_[x, 0 * x])], UNIT, 0.1)
    assert g.n_sccs == g.nodes.shape[0] > 1


def test_transitivity_flags_long_jumps():
    g = transitivity_graph([as_traj([[-0.9, -0.9], [0.9, 0.9], [-0.9, -0.9]])], UNIT, 0.1)
    assert g.long_jumps == 2 and g.warnings and g.single_scc


def test_transitivity_empty():
    with pytest.raises(EmptyCoverError):
        transitivity_graph([as_traj([[5.0, 5.0], [6.0, 6.0]])], UNIT, 0.1)
    with pytest.raises(ValidationError):
        transitivity_graph([], UNIT, 0.1)


def test_cells_bistable_two_basins():
    F = catalog.get("bistable")
    cfg = IntegratorConfig(t_end=30.0)
    trajs = [flow(F, [1.5, 1.0], cfg), flow(F, [-1.5, 1.0], cfg)]
    dec = cell_decomposition(trajs, box(catalog.entry("bistable").domain), 0.05)
    assert len(dec.components) == 2
    assert dec.membership() == [0, 1]
    assert not dec.covers_domain


def test_cells_concentric_circles():
    F = catalog.get("sho")
    cfg = IntegratorConfig(t_end=7.0)
    radii = [0.2, 0.4, 0.6, 0.8, 1.0]
    trajs = [flow(F, [r * np.cos(0.3), r * np.sin(0.3)], cfg) for r in radii]
    dec = cell_decomposition(trajs, box([[-1.1, 1.1], [-1.1, 1.1]]), 0.05)
    assert len(dec.components) == 5
    assert dec.every_component_transitive
    assert not dec.covers_domain
    assert dec.status == "not finitely discoverable at this resolution"
    assert dec.to_dict()["n_components"] == 5


def test_cells_merge_when_covers_meet():
    trajs = [circle_traj(0.5), circle_traj(0.52)]
    dec = cell_decomposition(trajs, UNIT, 0.1)
    assert len(dec.components) == 1 and dec.components[0].trajectories == (0, 1)
