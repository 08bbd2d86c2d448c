import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from incoherent_subspaces.core import ResponseGrid
from incoherent_subspaces.prox import (ProxSpec, project, project_grid,
                                       project_l1_ball, project_l1_sphere,
                                       project_l2_ball, project_l2_sphere,
                                       project_linf_ball, project_linf_sphere)

from conftest import feasible_candidates, l1_ball_oracle, pnorm

P_MODES = [(p, mode) for p in (1.0, 2.0, np.inf) for mode in ("equality", "inequality")]


def test_l2_examples():
    np.testing.assert_allclose(project_l2_sphere([3, 4], 1), [0.6, 0.8])
    np.testing.assert_array_equal(project_l2_sphere([1, 1, 1, 1], 2), [1, 1, 1, 1])
    np.testing.assert_array_equal(project_l2_sphere([0, 0], 1), [1, 0])
    np.testing.assert_array_equal(project_l2_ball([0.3, 0.4], 1), [0.3, 0.4])
    np.testing.assert_allclose(project_l2_ball([3, 4], 1), [0.6, 0.8])
    np.testing.assert_array_equal(project_l2_ball([1, 0], 0), [0, 0])


def test_l1_sphere_examples(rng):
    g = project_l1_sphere([0.5, -0.25], np.sqrt(2))
    np.testing.assert_allclose(g, [0.832107, -0.582107], atol=1e-6)
    np.testing.assert_allclose(project_l1_sphere([0, 0], 1), [0.5, 0.5])
    h = np.array([0.7, -0.3])
    np.testing.assert_array_equal(project_l1_sphere(h, 1.0), h)
    # sampling oracle: nothing on the sphere is closer
    cand = feasible_candidates(rng, 2, 1, "equality", np.sqrt(2), 100_000)
    best = np.linalg.norm(cand - [0.5, -0.25], axis=1).min()
    assert np.linalg.norm(g - [0.5, -0.25]) <= best + 1e-12


def test_l1_ball_examples():
    np.testing.assert_allclose(project_l1_ball([0.8, 0.6], 1), [0.6, 0.4])
    np.testing.assert_allclose(l1_ball_oracle([0.8, 0.6], 1), [0.6, 0.4])
    np.testing.assert_allclose(project_l1_ball([0.9, 0.05], 0.5), [0.5, 0.0])
    np.testing.assert_allclose(l1_ball_oracle([0.9, 0.05], 0.5), [0.5, 0.0])
    np.testing.assert_array_equal(project_l1_ball([0.2, -0.1], 1), [0.2, -0.1])


def test_linf_examples(rng):
    np.testing.assert_array_equal(project_linf_sphere([0.3, -0.9], 1), [0.3, -1.0])
    np.testing.assert_array_equal(project_linf_sphere([1.0, 0.2], 1), [1.0, 0.2])
    np.testing.assert_array_equal(project_linf_sphere([1.5, 2.5], 1), [1.0, 1.0])
    np.testing.assert_array_equal(project_linf_sphere([0, 0], 2), [2, 0])
    np.testing.assert_array_equal(project_linf_sphere([-0.5, 0.5], 1), [-1.0, 0.5])
    for h in ([0.3, -0.9], [1.5, 2.5]):
        g = project_linf_sphere(h, 1)
        cand = feasible_candidates(rng, 2, np.inf, "equality", 1.0, 100_000)
        assert np.linalg.norm(g - h) <= np.linalg.norm(cand - h, axis=1).min() + 1e-12
    np.testing.assert_array_equal(project_linf_ball([0.3, -0.9], 0.5), [0.3, -0.5])
    np.testing.assert_array_equal(project_linf_ball([0.1, -0.2], 0.5), [0.1, -0.2])
    np.testing.assert_array_equal(project_linf_ball([-2.0], 1), [-1.0])


def test_linf_ball_is_separable_clip(rng):
    h = rng.normal(size=50)
    # 1-D projection onto [-mu, mu], one coordinate at a time
    expected = [min(max(x, -0.5), 0.5) for x in h]
    np.testing.assert_array_equal(project_linf_ball(h, 0.5), expected)


@pytest.mark.parametrize("p,mode", P_MODES)
def test_feasibility(rng, p, mode):
    for _ in range(1000):
        m = rng.integers(1, 8)
        h = rng.standard_normal(m) * rng.choice([0.01, 1.0, 10.0])
        radius = rng.uniform(0.05, 3.0)
        g = project(h, p, mode, radius)
        if mode == "equality":
            assert abs(pnorm(g, p) - radius) <= 1e-9
        else:
            assert pnorm(g, p) <= radius + 1e-9


@pytest.mark.parametrize("p,mode", P_MODES)
def test_optimality_against_random_feasible_points(rng, p, mode):
    for _ in range(200):
        m = rng.integers(1, 6)
        h = rng.standard_normal(m) * rng.choice([0.2, 1.0, 3.0])
        radius = rng.uniform(0.1, 2.0)
        g = project(h, p, mode, radius)
        cand = feasible_candidates(rng, m, p, mode, radius, 10_000, around=g)
        assert np.linalg.norm(g - h) <= np.linalg.norm(cand - h, axis=1).min() + 1e-9


def test_l1_ball_matches_sort_oracle(rng):
    for _ in range(1000):
        m = rng.integers(1, 10)
        h = rng.standard_normal(m) * rng.choice([0.1, 1.0, 5.0])
        mu = rng.uniform(0.0, 3.0)
        np.testing.assert_allclose(project_l1_ball(h, mu), l1_ball_oracle(h, mu), atol=1e-10)


@settings(max_examples=300, deadline=None)
@given(arrays(np.float64, st.integers(1, 6), elements=st.floats(-10, 10)),
       st.floats(0.1, 5.0), st.sampled_from(P_MODES))
def test_idempotent(h, radius, pm):
    p, mode = pm
    g = project(h, p, mode, radius)
    np.testing.assert_allclose(project(g, p, mode, radius), g, atol=1e-12, rtol=0)


def test_batched_equals_rowwise(rng):
    H = rng.standard_normal((40, 4))
    for p, mode in P_MODES:
        batch = project(H, p, mode, 0.7)
        rows = np.array([project(h, p, mode, 0.7) for h in H])
        np.testing.assert_array_equal(batch, rows)


def test_prox_spec_validation():
    with pytest.raises(ValueError):
        ProxSpec(2, "equality", 0.0)
    with pytest.raises(ValueError):
        ProxSpec(2, "ball", 1.0)
    np.testing.assert_array_equal(ProxSpec(2, "inequality", 0.0)([1.0, 2.0]), [0.0, 0.0])


def _grid(rng, C, s, sizes):
    return ResponseGrid(rng.standard_normal((C * s, sum(sizes))), s, sizes)


@pytest.mark.parametrize("p", [1.0, 2.0, np.inf])
def test_project_grid_feasible(rng, p):
    grid = _grid(rng, 2, 3, [4, 5])
    beta, mu = 1.3, 0.2
    out = project_grid(grid, p, beta, mu)
    for i in range(2):
        for j in range(2):
            norms = pnorm(out.block(i, j).T, p)
            if i == j:
                np.testing.assert_allclose(norms, beta, atol=1e-10)
            else:
                assert np.all(norms <= mu + 1e-10)
    again = project_grid(out, p, beta, mu)
    np.testing.assert_allclose(again.values, out.values, atol=1e-12)


def test_project_grid_single_class_is_sphere_projection(rng):
    grid = _grid(rng, 1, 3, [6])
    out = project_grid(grid, 2, 1.0, 0.0)
    np.testing.assert_allclose(out.values, grid.values / np.linalg.norm(grid.values, axis=0))


def test_project_grid_blocks_independent(rng):
    grid = _grid(rng, 3, 2, [2, 3, 2])
    out = project_grid(grid, 1, np.sqrt(2), 0.1)
    for i in range(3):
        for j in range(3):
            blk = grid.block(i, j).T
            ref = project_l1_sphere(blk, np.sqrt(2)) if i == j else project_l1_ball(blk, 0.1)
            np.testing.assert_array_equal(out.block(i, j), ref.T)
