import numpy as np
import pytest

from zitterlab import noether
from zitterlab.momentum_grid import MomentumGrid
from zitterlab.wavepacket import (ModeAmplitudes, auto_spatial_grid, gaussian_amplitudes,
                                  make_spatial_grid, mean_position_direct, mean_velocity_direct,
                                  synthesize_field)


@pytest.fixture(scope="module")
def amps():
    grid = MomentumGrid(1, 1.0, 64, 1.0)
    return gaussian_amplitudes(grid, (0, 0, 0.05), 0.1, spin_weights=(1, 0.5 + 0.2j),
                               pair_mix=0.6, spin_basis="fixed")


def test_snapshot_currents(amps):
    sg = auto_spatial_grid(amps.grid, 512)
    snap = synthesize_field(amps, sg, 0.9)
    cur = noether.currents(snap)
    assert cur.j.shape == (4,) + sg.shape and cur.J.shape == (4, 4) + sg.shape
    assert cur.j[0].min() > -1e-12
    assert sg.integrate(cur.j[0]) == pytest.approx(1.0, abs=1e-6)
    v = np.array([sg.integrate(cur.j[k]) for k in (1, 2, 3)])
    assert np.allclose(v, mean_velocity_direct(snap), atol=1e-12)
    assert np.allclose(cur.J[0, 0], 0.9 * cur.j[0])


def test_noether_charge(amps):
    sg = auto_spatial_grid(amps.grid, 512)
    for t in (0.0, 1.7):
        snap = synthesize_field(amps, sg, t)
        x = noether.noether_charge(snap)
        assert x[0] == pytest.approx(t, abs=1e-6)
        assert np.array_equal(x[1:], mean_position_direct(snap))


def test_single_plane_wave_is_exactly_continuous():
    grid = MomentumGrid(1, 1.0, 8, 1.0)
    c = np.zeros((grid.size, 2), complex)
    c[5, 0] = 1.0
    amps = ModeAmplitudes(grid, c, np.zeros_like(c))
    sg = make_spatial_grid((2,), 64, grid.period(), transverse_points=5)
    slab = noether.sample_slab(amps, sg, 0.5 + 0.1 * np.arange(3))
    field, reports = noether.continuity_residual(slab)
    assert field.shape == (4, 1, 3, 3, 62)
    assert max(r.max_norm for r in reports) < 1e-8
    assert reports[3].spacings[0] == pytest.approx(0.1)


def test_nu_zero_row_is_time_times_divergence(amps):
    # R^0 = t_c D_mu j^mu + [mean of j^0 at t_c +- dt] - j^0(t_c); the bracket is O(dt^2)
    sg = make_spatial_grid((2,), 128, amps.grid.period(), transverse_points=3)
    gaps = []
    for dt in (0.05, 0.025):
        slab = noether.sample_slab(amps, sg, 2.0 + dt * np.arange(3))
        field, _ = noether.continuity_residual(slab)
        cur = noether.currents(slab)
        div_t = (cur.j[2, 0] - cur.j[0, 0]) / (2 * dt)
        div_z = (cur.j[1, 3][..., 2:] - cur.j[1, 3][..., :-2]) / (2 * sg.spacing[2])
        expected = (2.0 + dt) * (div_t[1:-1, 1:-1, 1:-1] + div_z[1:-1, 1:-1])
        gaps.append(np.abs(field[0, 0] - expected).max())
    assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.05)


def test_continuity_converges_at_second_order(amps, tmp_path):
    study = noether.convergence_study(amps, 200, 0.2, levels=2)
    assert np.all((study.ratios > 3.5) & (study.ratios < 4.5))
    assert study.charge_drift.max() < 1e-8
    path = tmp_path / "conv.csv"
    study.to_csv(path)
    assert path.read_text().splitlines()[0] == "nu,dx,dt,max_residual"
    back = noether.ConvergenceStudy.from_csv(path)
    assert np.array_equal(back.residuals, study.residuals)


def test_slab_validation(amps):
    sg = make_spatial_grid((2,), 16, 10.0, transverse_points=3)
    slab = noether.sample_slab(amps, sg, [0.0, 0.1])
    with pytest.raises(ValueError, match="3 time slices"):
        noether.continuity_residual(slab)
    with pytest.raises(ValueError):
        noether.SpacetimeSlab(np.array([0.0, 0.1, 0.3]), sg, np.zeros((3, 4) + sg.shape))
    with pytest.raises(ValueError):
        noether.SpacetimeSlab(np.array([0.0]), sg, np.zeros((1, 4, 2, 2, 2)))
    with pytest.raises(ValueError):
        noether.pseudo_u1_transform(slab, [1.0, 2.0])


def _slab(amps, level, box=40.0):
    dx, dt = 1.0 / 2 ** level, 0.2 / 2 ** level
    sg = make_spatial_grid((2,), int(box / dx), box, transverse_points=3)
    return noether.sample_slab(amps, sg, 1.0 + dt * np.arange(-1, 2))


def test_identity_transform_is_exact(amps):
    slab = _slab(amps, 0)
    same = noether.pseudo_u1_transform(slab, np.zeros(4))
    assert np.array_equal(same.psi, slab.psi)
    diff = noether.lagrangian_density(same, 1.0) - noether.lagrangian_density(slab, 1.0)
    assert np.abs(diff).max() < 1e-14


def test_gauge_invariance_converges(amps):
    eps = [0.3, 0.0, 0.0, 0.7]
    diffs = []
    for level in range(3):
        slab = _slab(amps, level)
        moved = noether.pseudo_u1_transform(slab, eps)
        assert np.allclose(moved.A[:, 0], 0.3) and np.allclose(moved.A[:, 3], 0.7)
        diffs.append(np.abs(noether.lagrangian_density(moved, 1.0)
                            - noether.lagrangian_density(slab, 1.0)).max())
    ratios = np.array(diffs[:-1]) / np.array(diffs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


def test_on_shell_lagrangian_vanishes_under_refinement(amps):
    vals = [np.abs(noether.lagrangian_density(_slab(amps, lev), 1.0).real).max() for lev in range(3)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[1] / vals[2] > 3.5


def test_pointwise_invariance_with_exact_derivatives(amps, rng):
    sg = make_spatial_grid((2,), 16, 20.0, transverse_points=3)
    t = 0.3
    psi = synthesize_field(amps, sg, t).psi
    dpsi = noether.field_derivatives(amps, sg, t)
    A = rng.normal(size=(4,) + sg.shape)
    F = noether.field_strength(rng.normal(size=(4, 4) + sg.shape))
    base = noether.lagrangian_from_derivatives(psi, dpsi, A, 1.0, F)
    eps = np.array([0.3, -0.2, 0.5, 1.1])
    x = sg.mesh()
    theta = eps[0] * t + sum(eps[k + 1] * x[k] for k in range(3))
    phase = np.exp(-1j * theta)
    psi2 = phase * psi
    dpsi2 = np.stack([phase * (dpsi[mu] - 1j * eps[mu] * psi) for mu in range(4)])
    A2 = A + eps[:, None, None, None]
    moved = noether.lagrangian_from_derivatives(psi2, dpsi2, A2, 1.0, F)
    assert np.abs(moved - base).max() < 1e-12 * np.abs(base).max()
    free = noether.lagrangian_from_derivatives(psi, dpsi, np.zeros_like(A), 1.0)
    assert np.abs(free).max() < 1e-14


def test_maxwell_term_sign():
    F = np.zeros((4, 4))
    F[0, 3], F[3, 0] = 1.0, -1.0  # pure electric field along z
    psi = np.zeros(4, complex)
    dens = noether.lagrangian_from_derivatives(psi, np.zeros((4, 4), complex), np.zeros(4), 1.0, F)
    # F_{mu nu} F^{mu nu} = -2 E^2, kept with the +1/4 prefactor
    assert dens == pytest.approx(-0.5)
