"""Currents of the position-type pseudo-U(1) symmetry and their continuity.

Under psi -> exp(-i theta) psi with theta = eps_0 t + eps . x and the gauge
field shifted by the constant eps, the Dirac-Maxwell Lagrangian is
unchanged. The associated current is J^{mu nu} = j^mu x^nu with
j^mu = psi-bar gamma^mu psi, and its divergence is not zero but
d_mu J^{mu nu} = j^nu. The charge J^{0 nu} integrated over space is
X^nu = (t Q, <x>): the position operator is the Noether charge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spinor_algebra import GAMMA, METRIC, dirac_adjoint
from .wavepacket import (FieldSnapshot, ModeAmplitudes, SpatialGrid, _modes, make_spatial_grid,
                         mean_position_direct)

NU_LABELS = ("t", "x", "y", "z")


@dataclass
class SpacetimeSlab:
    """Field samples on a uniform (t, x, y, z) lattice.

    psi is (T, 4, nx, ny, nz); the optional external potential A carries a
    lower index and is (T, 4, nx, ny, nz) as well.
    """

    times: np.ndarray
    spatial_grid: SpatialGrid
    psi: np.ndarray
    A: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        shape = (len(self.times), 4) + self.spatial_grid.shape
        if self.psi.shape != shape:
            raise ValueError(f"psi has shape {self.psi.shape}, expected {shape}")
        if self.A is not None and np.shape(self.A) != shape:
            raise ValueError(f"A has shape {np.shape(self.A)}, expected {shape}")
        if len(self.times) > 1:
            steps = np.diff(self.times)
            if np.ptp(steps) > 1e-12 * max(1.0, abs(steps[0])):
                raise ValueError("time samples must be uniformly spaced")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def spacings(self) -> tuple:
        return (self.dt,) + self.spatial_grid.spacing

    def snapshot(self, index: int) -> FieldSnapshot:
        return FieldSnapshot(self.spatial_grid, self.psi[index], float(self.times[index]))

    def coordinates(self) -> list[np.ndarray]:
        """x^nu broadcast to (T, nx, ny, nz)."""
        shape = (len(self.times),) + self.spatial_grid.shape
        t = np.broadcast_to(self.times[:, None, None, None], shape)
        xs = [np.broadcast_to(x[None], shape) for x in self.spatial_grid.mesh()]
        return [t] + xs


@dataclass
class CurrentTensors:
    """j[..., mu] = psi-bar gamma^mu psi and J[..., mu, nu] = j^mu x^nu.

    For a slab the leading axis is time; for a snapshot it is absent. The
    Lorentz indices are always followed by the three spatial axes.
    """

    j: np.ndarray
    J: np.ndarray


def _plane_wave_sum(amps: ModeAmplitudes, spatial_grid: SpatialGrid, t: float,
                    derivative: int | None = None) -> np.ndarray:
    """psi or d_mu psi (derivative = mu) at one time, synthesized mode by mode."""
    grid = amps.grid
    mc = _modes(grid)
    pref = grid.weights * (2.0 * np.pi) ** (-grid.dim / 2.0) * mc.root
    pos = np.einsum("ps,psa->pa", amps.c, mc.u) * (pref * np.exp(-1j * mc.e * t))[:, None]
    neg = np.einsum("ps,psa->pa", np.conj(amps.d), mc.v) * (pref * np.exp(1j * mc.e * t))[:, None]
    if derivative == 0:
        pos = pos * (-1j * mc.e)[:, None]
        neg = neg * (1j * mc.e)[:, None]
    elif derivative is not None:
        k = derivative - 1
        pos = pos * (1j * grid.nodes[:, k])[:, None]
        neg = neg * (-1j * grid.nodes[:, k])[:, None]
    ex = [np.exp(1j * np.outer(grid.nodes[:, k], spatial_grid.coords[k])) for k in range(3)]
    return (np.einsum("pa,pi,pj,pk->aijk", pos, *ex, optimize=True)
            + np.einsum("pa,pi,pj,pk->aijk", neg, *(np.conj(e) for e in ex), optimize=True))


def sample_slab(amps: ModeAmplitudes, spatial_grid: SpatialGrid, times) -> SpacetimeSlab:
    times = np.asarray(times, dtype=float)
    psi = np.stack([_plane_wave_sum(amps, spatial_grid, t) for t in times])
    return SpacetimeSlab(times=times, spatial_grid=spatial_grid, psi=psi)


def field_derivatives(amps: ModeAmplitudes, spatial_grid: SpatialGrid, t: float) -> np.ndarray:
    """Exact d_mu psi, shaped (4 mu, 4 spinor, nx, ny, nz)."""
    return np.stack([_plane_wave_sum(amps, spatial_grid, t, mu) for mu in range(4)])


def _bilinears(psi: np.ndarray, coords: list) -> CurrentTensors:
    # psi is (T, 4, nx, ny, nz); coords are x^nu shaped (T, nx, ny, nz)
    bar = dirac_adjoint(np.moveaxis(psi, 1, -1))
    j = np.real(np.einsum("t...a,mab,tb...->tm...", bar, GAMMA, psi))
    J = np.stack([np.stack([j[:, mu] * coords[nu] for nu in range(4)], axis=1)
                  for mu in range(4)], axis=1)
    return CurrentTensors(j=j, J=J)


def currents(field) -> CurrentTensors:
    """Currents of a FieldSnapshot (x^0 = its time) or of a whole SpacetimeSlab."""
    if isinstance(field, FieldSnapshot):
        slab = SpacetimeSlab(np.array([field.time]), field.spatial_grid, field.psi[None])
        out = _bilinears(slab.psi, slab.coordinates())
        return CurrentTensors(j=out.j[0], J=out.J[0])
    return _bilinears(field.psi, field.coordinates())


def _central(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Central difference on interior points; the two end samples are dropped."""
    hi = np.take(values, np.arange(2, values.shape[axis]), axis=axis)
    lo = np.take(values, np.arange(0, values.shape[axis] - 2), axis=axis)
    return (hi - lo) / (2.0 * h)


def _interior(values: np.ndarray, axes) -> np.ndarray:
    for ax in axes:
        values = np.take(values, np.arange(1, values.shape[ax] - 1), axis=ax)
    return values


@dataclass
class ResidualReport:
    nu: int
    spacings: tuple  # (dt, dx, dy, dz)
    max_norm: float
    location: tuple  # (t, x, y, z) of the largest |R^nu|


def continuity_residual(slab: SpacetimeSlab, tensors: CurrentTensors | None = None):
    """R^nu = D_t J^{0 nu} + sum_k D_k J^{k nu} - j^nu on interior lattice points.

    Central differences on every axis, so each axis needs at least 3 samples.
    Returns the residual field, shaped (4, T-2, nx-2, ny-2, nz-2), and one
    ResidualReport per nu.
    """
    if len(slab.times) < 3:
        raise ValueError(f"continuity check needs >= 3 time slices, got {len(slab.times)}")
    if min(slab.spatial_grid.shape) < 3:
        raise ValueError("every spatial axis needs at least 3 samples")
    if slab.A is not None and np.any(slab.A):
        raise ValueError("the continuity identity is checked for A = 0 only")
    tensors = tensors or currents(slab)
    spacing = slab.spacings
    out = []
    for nu in range(4):
        div = 0.0
        for mu in range(4):
            d = _central(tensors.J[:, mu, nu], mu, spacing[mu])
            div = div + _interior(d, [a for a in range(4) if a != mu])
        out.append(div - _interior(tensors.j[:, nu], range(4)))
    field = np.stack(out)
    inner = [c[1:-1] for c in [slab.times] + list(slab.spatial_grid.coords)]
    reports = []
    for nu in range(4):
        a = np.abs(field[nu])
        idx = np.unravel_index(int(np.argmax(a)), a.shape)
        reports.append(ResidualReport(nu, tuple(float(h) for h in spacing), float(a[idx]),
                                      tuple(float(inner[k][i]) for k, i in enumerate(idx))))
    return field, reports


def max_residuals(slab: SpacetimeSlab) -> np.ndarray:
    return np.array([r.max_norm for r in continuity_residual(slab)[1]])


def charge_series(slab: SpacetimeSlab) -> np.ndarray:
    """Q(t_k) = int j^0 d^3x for every time slice."""
    return np.array([slab.snapshot(k).norm() for k in range(len(slab.times))])


@dataclass
class ConvergenceStudy:
    dx: np.ndarray
    dt: np.ndarray
    residuals: np.ndarray  # (levels, 4)
    charge_drift: np.ndarray  # (levels,) max |Q(t_k) - Q(t_0)| over each slab

    @property
    def ratios(self) -> np.ndarray:
        """Successive residual ratios per nu, shaped (levels - 1, 4)."""
        return self.residuals[:-1] / self.residuals[1:]

    def rows(self) -> list:
        return [[nu, float(self.dx[i]), float(self.dt[i]), float(self.residuals[i, nu])]
                for i in range(len(self.dx)) for nu in range(4)]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("nu,dx,dt,max_residual\n")
            for nu, dx, dt, r in self.rows():
                fh.write(f"{nu},{dx:.17g},{dt:.17g},{r:.17g}\n")

    @classmethod
    def from_csv(cls, path) -> "ConvergenceStudy":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        levels = len(data) // 4
        data = data.reshape(levels, 4, 4)
        return cls(data[:, 0, 1], data[:, 0, 2], data[:, :, 3], np.full(levels, np.nan))


def convergence_study(amps: ModeAmplitudes, n_points: int, dt0: float, box: float | None = None,
                      t_center: float = 1.0, levels: int = 2, n_times: int = 3,
                      transverse_points: int = 5, transverse_spacing: float = 1.0
                      ) -> ConvergenceStudy:
    """Halve dx and dt together and record max |R^nu| at each level.

    ``box`` defaults to the spatial period of the momentum grid, where the
    charge integral is exact and Q(t) is constant to roundoff. ``n_times``
    samples (odd, at least 3) are centred on ``t_center``.
    """
    if n_times < 3 or n_times % 2 == 0:
        raise ValueError("n_times must be odd and at least 3")
    box = amps.grid.period() if box is None else box
    active = amps.grid.active_axes
    half = n_times // 2
    dxs, dts, res, drift = [], [], [], []
    for level in range(levels):
        n, dt = n_points * 2 ** level, dt0 / 2 ** level
        sgrid = make_spatial_grid(active, n, box, transverse_points=transverse_points,
                                  transverse_spacing=transverse_spacing)
        slab = sample_slab(amps, sgrid, t_center + dt * np.arange(-half, half + 1))
        q = charge_series(slab)
        dxs.append(box / n)
        dts.append(dt)
        res.append(max_residuals(slab))
        drift.append(float(np.abs(q - q[0]).max()))
    return ConvergenceStudy(np.array(dxs), np.array(dts), np.array(res), np.array(drift))


def noether_charge(snapshot: FieldSnapshot) -> np.ndarray:
    """X^nu = int d^3x J^{0 nu} = (t Q, <x>).

    The spatial part goes through mean_position_direct, so the two agree
    bitwise.
    """
    return np.concatenate([[snapshot.time * snapshot.norm()], mean_position_direct(snapshot)])


def pseudo_u1_transform(slab: SpacetimeSlab, eps) -> SpacetimeSlab:
    """psi' = exp(-i theta) psi with theta = eps_0 t + eps_k x^k, A'_mu = A_mu + eps_mu.

    ``eps`` carries a lower index, so d_mu theta = eps_mu. A missing A is
    treated as zero.
    """
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (4,):
        raise ValueError("eps must hold 4 real constants")
    x = slab.coordinates()
    theta = sum(eps[mu] * x[mu] for mu in range(4))
    psi = np.exp(-1j * theta)[:, None] * slab.psi
    A = np.zeros_like(slab.psi, dtype=float) if slab.A is None else np.asarray(slab.A)
    A = A + eps[None, :, None, None, None]
    return SpacetimeSlab(slab.times, slab.spatial_grid, psi, A)


def field_strength(dA) -> np.ndarray:
    """F_{mu nu} = d_mu A_nu - d_nu A_mu from dA[mu, nu] = d_mu A_nu."""
    dA = np.asarray(dA)
    return dA - np.swapaxes(dA, 0, 1)


def lagrangian_from_derivatives(psi, dpsi, A, m: float, F=None) -> np.ndarray:
    """psi-bar (i gamma^mu D_mu - m) psi + (1/4) F_{mu nu} F^{mu nu}, D_mu = d_mu + i A_mu.

    Shapes: psi (4, ...), dpsi (4 mu, 4, ...), A (4 mu, ...), F (4, 4, ...).
    All Lorentz indices on inputs are lower. Returns the complex density.
    """
    psi = np.asarray(psi)
    bar = np.einsum("a...,ab->b...", np.conj(psi), GAMMA[0])
    cov = np.stack([dpsi[mu] + 1j * A[mu] * psi for mu in range(4)])
    kinetic = sum(1j * np.einsum("a...,ab,b...->...", bar, GAMMA[mu], cov[mu]) for mu in range(4))
    dens = kinetic - m * np.einsum("a...,a...->...", bar, psi)
    if F is not None:
        F = np.asarray(F)
        F_up = np.einsum("am,bn,mn...->ab...", METRIC, METRIC, F)
        dens = dens + 0.25 * np.einsum("mn...,mn...->...", F, F_up)
    return dens


def lagrangian_density(slab: SpacetimeSlab, m: float) -> np.ndarray:
    """L on interior lattice points, with central differences for every d_mu.

    Returns (T-2, nx-2, ny-2, nz-2). A missing A is zero; otherwise F is
    differenced from A as well.
    """
    if len(slab.times) < 3 or min(slab.spatial_grid.shape) < 3:
        raise ValueError("every lattice axis needs at least 3 samples")
    spacing = slab.spacings
    # lattice axes of psi after moving the spinor index out: (T, nx, ny, nz)
    psi = np.moveaxis(slab.psi, 1, 0)
    dpsi = np.stack([_interior(_central(psi, 1 + mu, spacing[mu]),
                               [1 + a for a in range(4) if a != mu]) for mu in range(4)])
    psi_in = _interior(psi, range(1, 5))
    if slab.A is None:
        A_in = np.zeros((4,) + psi_in.shape[1:])
        F = None
    else:
        A = np.moveaxis(np.asarray(slab.A), 1, 0)
        A_in = _interior(A, range(1, 5))
        dA = np.stack([_interior(_central(A, 1 + mu, spacing[mu]),
                                 [1 + a for a in range(4) if a != mu]) for mu in range(4)])
        F = field_strength(dA)
    return lagrangian_from_derivatives(psi_in, dpsi, A_in, m, F)
