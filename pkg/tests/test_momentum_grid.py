import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zitterlab.momentum_grid import (MomentumGrid, build_symmetric_grid, dispersion, energy)


@given(dim=st.sampled_from([1, 2, 3]), half=st.integers(1, 6),
       p_max=st.floats(0.01, 100.0), m=st.floats(0.01, 10.0))
@settings(max_examples=40, deadline=None)
def test_negation_map_is_exact_involution(dim, half, p_max, m):
    grid = build_symmetric_grid(dim, p_max, 2 * half, m)
    neg = grid.negation_map
    assert np.array_equal(grid.nodes[neg], -grid.nodes)
    assert np.array_equal(neg[neg], np.arange(grid.size))
    assert np.all(neg != np.arange(grid.size))


def test_node_count_and_weights():
    grid = build_symmetric_grid(3, 2.0, 4, 1.0)
    assert grid.size == 64
    assert np.allclose(grid.weights, 1.0)
    assert grid.integrate(np.ones(grid.size)) == pytest.approx((2 * 2.0) ** 3)


def test_one_dimensional_grid_lives_on_z(grid_1d):
    assert np.all(grid_1d.nodes[:, :2] == 0)
    assert np.min(np.abs(grid_1d.nodes[:, 2])) == pytest.approx(grid_1d.dp / 2)


def test_midpoint_quadrature_of_gaussian(grid_1d):
    p = grid_1d.nodes[:, 2]
    sigma = 0.1
    vals = np.exp(-p ** 2 / (2 * sigma ** 2))
    assert grid_1d.integrate(vals) == pytest.approx(np.sqrt(2 * np.pi) * sigma, rel=1e-12)


@pytest.mark.parametrize("kwargs, match", [
    (dict(dim=1, p_max=1.0, n_per_axis=5, mass=1.0), "odd"),
    (dict(dim=1, p_max=0.0, n_per_axis=4, mass=1.0), "p_max"),
    (dict(dim=1, p_max=1.0, n_per_axis=4, mass=0.0), "mass"),
    (dict(dim=4, p_max=1.0, n_per_axis=4, mass=1.0), "dim"),
])
def test_invalid_grids_rejected(kwargs, match):
    with pytest.raises(ValueError, match=match):
        MomentumGrid(**kwargs)


def test_energy_and_dispersion():
    grid = build_symmetric_grid(2, 1.0, 2, 0.5)
    for i, p in enumerate(grid.nodes):
        assert energy(grid, i) == pytest.approx(np.sqrt(p @ p + 0.25))
    assert dispersion([3.0, 0.0, 4.0], 1e-300) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        dispersion([1.0, 0, 0], 0.0)


def test_json_roundtrip(grid_1d):
    again = MomentumGrid.from_json(grid_1d.to_json())
    assert again == grid_1d
    assert np.array_equal(again.nodes, grid_1d.nodes)
    assert json.loads(grid_1d.to_json())["n_per_axis"] == 64


def test_arrays_are_read_only(grid_1d):
    with pytest.raises(ValueError):
        grid_1d.nodes[0, 0] = 1.0


def test_cell_index_roundtrip():
    grid = build_symmetric_grid(2, 1.0, 4, 1.0)
    for node in range(grid.size):
        assert grid.node_at(grid.axis_index(node)) == node


def test_small_grid_examples():
    g = build_symmetric_grid(1, 1.0, 2, 1.0)
    assert np.array_equal(g.nodes, [[0, 0, -0.5], [0, 0, 0.5]])
    assert np.array_equal(g.weights, [1.0, 1.0]) and list(g.negation_map) == [1, 0]
    g = build_symmetric_grid(1, 2.0, 4, 1.0)
    assert np.array_equal(g.nodes[:, 2], [-1.5, -0.5, 0.5, 1.5])
    g = build_symmetric_grid(3, 1.0, 2, 0.5)
    assert g.size == 8 and np.allclose(g.energies, 1.0)


def test_energy_near_rest():
    grid = build_symmetric_grid(1, 1e-4, 2, 1.0)
    assert energy(grid, 1) == pytest.approx(1 + 0.5 * (0.5e-4) ** 2, rel=1e-15)


@pytest.mark.parametrize("n", [8, 16, 32])
def test_midpoint_rule_is_second_order(n):
    # bump with a kink in f'' inside the box: the error is O(dp^2), not spectral
    def f(p):
        return np.where(np.abs(p) < 0.7, (0.49 - p ** 2) ** 2, 0.0) * np.cos(p)

    from scipy.integrate import quad
    exact = quad(lambda p: float(f(np.array(p))), -0.7, 0.7, epsabs=1e-15)[0]
    errs = []
    for k in (n, 2 * n):
        g = build_symmetric_grid(1, 1.0, k, 1.0)
        errs.append(abs(g.integrate(f(g.nodes[:, 2])) - exact))
    assert errs[0] / errs[1] >= 3.5
