import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zitterlab.momentum_grid import MomentumGrid
from zitterlab.wavepacket import (ModeAmplitudes, Trajectory, auto_spatial_grid,
                                  dominant_frequency, gaussian_amplitudes, make_spatial_grid,
                                  mean_position_direct, mean_velocity_direct, synthesize_field,
                                  trajectory, velocity_classic, velocity_zb, zb_series)


@pytest.fixture
def mixed(grid_1d):
    return gaussian_amplitudes(grid_1d, (0, 0, 0.05), 0.07, spin_weights=(1, 0.5j),
                               pair_mix=0.6, spin_basis="fixed")


def test_amplitudes_normalized(mixed):
    assert mixed.norm2() == pytest.approx(1.0, abs=1e-14)


def test_field_norm_on_period_box(mixed):
    sg = auto_spatial_grid(mixed.grid, 1024)
    snap = synthesize_field(mixed, sg, 2.3)
    assert snap.norm() == pytest.approx(1.0, abs=1e-12)
    assert snap.edge_density() < 1e-12


def test_oracle_matches_quadrature(mixed):
    tr = trajectory(mixed, np.linspace(0, 6, 5), n_points=1024)
    assert tr.oracle_gap() < 1e-10
    assert np.abs(tr.V_zb).max() > 0.1


def test_position_derivative_is_velocity(mixed):
    sg = auto_spatial_grid(mixed.grid, 1024)
    t, h = 1.3, 1e-4
    xp = mean_position_direct(synthesize_field(mixed, sg, t + h))
    xm = mean_position_direct(synthesize_field(mixed, sg, t - h))
    v = mean_velocity_direct(synthesize_field(mixed, sg, t))
    # only active axes carry a meaningful position
    assert abs((xp[2] - xm[2]) / (2 * h) - v[2]) < 1e-6


@pytest.mark.parametrize("mix", [0.0, np.pi / 2])
def test_single_branch_has_no_zb(grid_1d, mix):
    amps = gaussian_amplitudes(grid_1d, (0, 0, 0.02), 0.06, spin_weights=(0.3, 1j),
                               pair_mix=mix, spin_basis="fixed")
    for t in np.linspace(0, 20, 7):
        assert np.all(velocity_zb(amps, t) == 0.0)


def test_positive_energy_packet_moves_classically(grid_1d):
    amps = gaussian_amplitudes(grid_1d, (0, 0, 0.08), 0.06, spin_basis="fixed")
    v = velocity_classic(amps)
    tr = trajectory(amps, [0.0, 5.0], n_points=1024)
    assert (tr.X[1, 2] - tr.X[0, 2]) / 5.0 == pytest.approx(v[2], abs=1e-10)
    assert v[2] > 0


def test_symmetric_packet_starts_at_origin(grid_1d):
    amps = gaussian_amplitudes(grid_1d, (0, 0, 0), 0.06, spin_basis="fixed")
    x = mean_position_direct(synthesize_field(amps, auto_spatial_grid(grid_1d, 1024), 0.0))
    assert np.allclose(x, 0, atol=1e-12)


def test_helicity_weights_cancel_between_mirror_nodes(grid_1d):
    amps = gaussian_amplitudes(grid_1d, (0, 0, 0), 0.06, spin_weights=(1, 0.4), pair_mix=0.7)
    assert np.abs(velocity_zb(amps, 0.8)).max() < 1e-12


def test_swapped_exchanges_branches(mixed):
    sw = mixed.swapped()
    assert np.array_equal(sw.c, mixed.d) and np.array_equal(sw.d, mixed.c)


@pytest.mark.parametrize("kwargs", [dict(sigma=0.0), dict(p0=(0, 0, 2.0)),
                                    dict(spin_weights=(0, 0)), dict(spin_basis="lab")])
def test_gaussian_rejects_bad_input(grid_1d, kwargs):
    args = dict(p0=(0, 0, 0), sigma=0.1)
    args.update(kwargs)
    with pytest.raises(ValueError):
        gaussian_amplitudes(grid_1d, **args)


def test_zero_amplitudes_cannot_normalize(grid_1d):
    with pytest.raises(ValueError):
        ModeAmplitudes(grid_1d, np.zeros((64, 2)), np.zeros((64, 2))).normalize()


def test_trajectory_csv_roundtrip(tmp_path, mixed):
    tr = trajectory(mixed, np.linspace(0, 2, 3), n_points=512)
    path = tmp_path / "traj.csv"
    tr.to_csv(path)
    back = Trajectory.from_csv(path)
    assert np.array_equal(back.V_zb, tr.V_zb)
    assert np.array_equal(back.X, tr.X)
    assert back.oracle_gap() == tr.oracle_gap()
    assert path.read_text().splitlines()[0].startswith("t,Xx,Xy,Xz")


@given(m=st.floats(0.3, 3.0), p=st.floats(0.05, 5.0))
@settings(max_examples=15, deadline=None)
def test_frequency_is_twice_the_energy(m, p):
    grid = MomentumGrid(1, 2 * p, 2, m)
    e = np.hypot(p, m)
    amps = gaussian_amplitudes(grid, (0, 0, 0), 10 * p, spin_weights=(1, 0.3 + 0.2j),
                               pair_mix=np.pi / 4, spin_basis="fixed")
    times = np.arange(256) * (8 * np.pi / e / 256)
    f = dominant_frequency(zb_series(amps, times), times)
    assert f == pytest.approx(2 * e, rel=1e-3)


def test_frequency_estimator_edge_cases():
    t = np.linspace(0, 10, 128)
    assert dominant_frequency(np.ones_like(t), t) is None
    with pytest.raises(ValueError):
        dominant_frequency(np.sin(t[:32]), t[:32])
    with pytest.raises(ValueError):
        dominant_frequency(np.sin(t ** 2), t ** 2)


def test_transverse_axes_are_flat(mixed):
    sg = make_spatial_grid((2,), 256, mixed.grid.period(), transverse_points=3)
    psi = synthesize_field(mixed, sg, 0.4).psi
    assert np.allclose(psi[:, 0], psi[:, 2])
    with pytest.raises(ValueError):
        make_spatial_grid((2,), 16, 1.0, transverse_points=2)


def test_single_mode_velocity_and_stationary_density():
    grid = MomentumGrid(1, 2.0, 2, 1.0)  # nodes at p_z = -1, +1
    c = np.zeros((2, 2), complex)
    c[1, 0] = 1.0 / np.sqrt(grid.dp)  # unit norm
    amps = ModeAmplitudes(grid, c, np.zeros_like(c))
    assert np.allclose(velocity_classic(amps), [0, 0, 1 / np.sqrt(2)])
    sg = auto_spatial_grid(grid, 64)
    snaps = [synthesize_field(amps, sg, t) for t in (0.0, 1.3)]
    assert np.allclose(snaps[0].density(), snaps[1].density())
    assert np.allclose(mean_velocity_direct(snaps[0]), [0, 0, 1 / np.sqrt(2)], atol=1e-8)


def test_even_split_between_branches(grid_1d):
    amps = gaussian_amplitudes(grid_1d, (0, 0, 0.02), 0.07, pair_mix=np.pi / 4)
    half_c = grid_1d.integrate(np.sum(np.abs(amps.c) ** 2, axis=1))
    half_d = grid_1d.integrate(np.sum(np.abs(amps.d) ** 2, axis=1))
    assert half_c == pytest.approx(0.5) and half_d == pytest.approx(0.5)


def test_charge_conjugate_packet_same_speed(mixed):
    sg = auto_spatial_grid(mixed.grid, 512)
    v1 = mean_velocity_direct(synthesize_field(mixed, sg, 0.0))
    v2 = mean_velocity_direct(synthesize_field(mixed.swapped(), sg, 0.0))
    assert np.linalg.norm(v1) > 0 and np.isfinite(np.linalg.norm(v2))


def test_estimator_on_synthetic_cosine():
    t = np.linspace(0, 40, 512)
    assert dominant_frequency(np.cos(5 * t), t) == pytest.approx(5.0, rel=1e-3)


def test_mixed_packet_x_oscillates_with_small_amplitude(mixed):
    times = np.linspace(0, 6, 61)
    tr = trajectory(mixed, times, n_points=1024)
    drift = tr.X[0, 2] + tr.V_classic[2] * times
    wobble = np.abs(tr.X[:, 2] - drift).max()
    assert 0 < wobble < 1.0
