"""Single-particle Dirac wavepackets and their mean velocity.

The field is synthesized from mode amplitudes c(p, s), d(p, s) on a
MomentumGrid,

    psi(x, t) = sum_p w (2 pi)^(-dim/2) sqrt(m/E)
                sum_s [c u e^{-i(Et - p.x)} + d^* v e^{+i(Et - p.x)}],

and the mean velocity is computed two ways: by spatial quadrature of
psi^dag alpha psi, and in closed form as a constant classical part plus an
interference term oscillating as e^{+-2iEt}.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .momentum_grid import MomentumGrid
from .spinor_algebra import ALPHA, spin_frame, spinor_table

TRAJECTORY_HEADER = ["t", "Xx", "Xy", "Xz", "Vx", "Vy", "Vz",
                     "Vcx", "Vcy", "Vcz", "Vzbx", "Vzby", "Vzbz", "norm"]


@dataclass
class ModeAmplitudes:
    grid: MomentumGrid
    c: np.ndarray  # (n_nodes, 2)
    d: np.ndarray  # (n_nodes, 2)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=complex).reshape(self.grid.size, 2)
        self.d = np.asarray(self.d, dtype=complex).reshape(self.grid.size, 2)

    def norm2(self) -> float:
        dens = np.sum(np.abs(self.c) ** 2 + np.abs(self.d) ** 2, axis=1)
        return float(self.grid.integrate(dens))

    def normalize(self) -> "ModeAmplitudes":
        n2 = self.norm2()
        if n2 == 0.0:
            raise ValueError("cannot normalize all-zero amplitudes")
        scale = 1.0 / np.sqrt(n2)
        return ModeAmplitudes(self.grid, self.c * scale, self.d * scale)

    def swapped(self) -> "ModeAmplitudes":
        """Exchange the particle and antiparticle amplitudes."""
        return ModeAmplitudes(self.grid, self.d.copy(), self.c.copy())


def gaussian_amplitudes(grid: MomentumGrid, p0, sigma: float, spin_weights=(1.0, 0.0),
                        pair_mix: float = 0.0, pair_phase: float = 0.0,
                        spin_basis: str = "helicity") -> ModeAmplitudes:
    """Gaussian packet around p0 with a cos/sin split between c and d.

    c(p, s) ~ cos(pair_mix) w_s(p) g(p),
    d(p, s) ~ e^{i pair_phase} sin(pair_mix) w_s(p) g(p),
    g(p) = exp(-|p - p0|^2 / (4 sigma^2)).

    With ``spin_basis="helicity"`` the weights w_s = spin_weights[s] are
    helicity amplitudes. With ``spin_basis="fixed"`` spin_weights is a
    lab-frame two-spinor zeta, projected on each node's spin frame so that
    the upper (c) and lower (d^* v) components both carry zeta.

    Note: helicity weights shared by c and d give a ZB velocity that cancels
    exactly between p and -p; use the fixed basis to see trembling motion.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    p0 = np.asarray(p0, dtype=float)
    if np.any(np.abs(p0) > grid.p_max):
        raise ValueError("p0 lies outside the grid extent")
    sw = np.asarray(spin_weights, dtype=complex)
    if sw.shape != (2,) or not np.any(sw):
        raise ValueError("spin_weights must be two complex numbers, not both zero")
    g = np.exp(-np.sum((grid.nodes - p0) ** 2, axis=1) / (4.0 * sigma ** 2))
    if spin_basis == "helicity":
        wc = np.broadcast_to(sw, (grid.size, 2))
        wd = wc
    elif spin_basis == "fixed":
        wc = np.array([spin_frame(p).conj().T @ sw for p in grid.nodes])
        wd = np.conj([spin_frame(-p).conj().T @ sw for p in grid.nodes])
    else:
        raise ValueError(f"unknown spin_basis {spin_basis!r}")
    cos_part, sin_part = np.cos(pair_mix), np.sin(pair_mix)
    c = cos_part * g[:, None] * wc
    d = np.exp(1j * pair_phase) * sin_part * g[:, None] * wd
    # exact zeros where cos/sin vanish analytically
    if abs(sin_part) < 1e-15:
        d = np.zeros_like(d)
    if abs(cos_part) < 1e-15:
        c = np.zeros_like(c)
    amps = ModeAmplitudes(grid, c, d)
    if amps.norm2() == 0.0:
        raise ValueError("Gaussian has no weight on the grid")
    return amps.normalize()


@dataclass(frozen=True)
class SpatialGrid:
    """Cartesian point grid. Only active axes are integrated over.

    Inactive axes carry an odd number of points centred on 0; the field is
    constant along them, and integrals use the central slice.
    """

    coords: tuple
    active: tuple

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(len(c) for c in self.coords)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(float(c[1] - c[0]) if len(c) > 1 else 1.0 for c in self.coords)

    @property
    def cell_volume(self) -> float:
        vol = 1.0
        for h, act in zip(self.spacing, self.active):
            if act:
                vol *= h
        return vol

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.coords, indexing="ij")

    def _select(self, values: np.ndarray) -> np.ndarray:
        # values shaped (..., nx, ny, nz)
        idx = [slice(None)] * values.ndim
        for ax, act in enumerate(self.active):
            if not act:
                idx[values.ndim - 3 + ax] = slice(len(self.coords[ax]) // 2,
                                                   len(self.coords[ax]) // 2 + 1)
        return values[tuple(idx)]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Midpoint quadrature over the last three axes."""
        sel = self._select(np.asarray(values))
        return np.sum(sel, axis=(-3, -2, -1)) * self.cell_volume


def make_spatial_grid(active_axes, n_points: int, length: float,
                      transverse_points: int = 1, transverse_spacing: float | None = None
                      ) -> SpatialGrid:
    """Cell-centred grid of ``n_points`` per active axis over [-L/2, L/2)."""
    if n_points <= 0 or not length > 0:
        raise ValueError("need a positive point count and box length")
    if transverse_points % 2 != 1:
        raise ValueError("transverse_points must be odd")
    h = length / n_points
    axis = (np.arange(n_points) + 0.5 - n_points / 2) * h
    ht = h if transverse_spacing is None else transverse_spacing
    trans = (np.arange(transverse_points) - transverse_points // 2) * ht
    coords, active = [], []
    for ax in range(3):
        if ax in active_axes:
            coords.append(axis)
            active.append(True)
        else:
            coords.append(trans.copy())
            active.append(False)
    return SpatialGrid(coords=tuple(coords), active=tuple(active))


def auto_spatial_grid(grid: MomentumGrid, n_points: int) -> SpatialGrid:
    """Box equal to one spatial period of the momentum grid.

    Over this box the discrete plane waves are exactly orthogonal, so for
    n_points > n_per_axis the quadrature of any bilinear is exact up to
    roundoff; the packet must still fit inside to keep X meaningful.
    """
    return make_spatial_grid(grid.active_axes, n_points, grid.period())


@dataclass
class FieldSnapshot:
    spatial_grid: SpatialGrid
    psi: np.ndarray  # (4, nx, ny, nz)
    time: float

    def density(self) -> np.ndarray:
        return np.sum(np.abs(self.psi) ** 2, axis=0)

    def norm(self) -> float:
        return float(self.spatial_grid.integrate(self.density()))

    def edge_density(self) -> float:
        """Largest density on the box faces of the active axes (leakage diagnostic)."""
        dens = self.spatial_grid._select(self.density())
        worst = 0.0
        for ax, act in enumerate(self.spatial_grid.active):
            if act:
                worst = max(worst, float(np.take(dens, [0, -1], axis=ax).max()))
        return worst


class _ModeCache:
    """Per-grid spinor tables, reused across time samples."""

    def __init__(self, grid: MomentumGrid):
        self.grid = grid
        self.u, self.v = spinor_table(grid.nodes, grid.mass)
        self.e = grid.energies
        self.root = np.sqrt(grid.mass / self.e)


_CACHE: dict = {}


def _modes(grid: MomentumGrid) -> _ModeCache:
    key = (grid.dim, grid.p_max, grid.n_per_axis, grid.mass)
    if key not in _CACHE:
        _CACHE[key] = _ModeCache(grid)
    return _CACHE[key]


def synthesize_field(amps: ModeAmplitudes, spatial_grid: SpatialGrid, t: float) -> FieldSnapshot:
    grid = amps.grid
    mc = _modes(grid)
    pref = grid.weights * (2.0 * np.pi) ** (-grid.dim / 2.0) * mc.root
    pos = np.einsum("ps,psa->pa", amps.c, mc.u) * (pref * np.exp(-1j * mc.e * t))[:, None]
    neg = np.einsum("ps,psa->pa", np.conj(amps.d), mc.v) * (pref * np.exp(1j * mc.e * t))[:, None]
    ex = [np.exp(1j * np.outer(grid.nodes[:, k], spatial_grid.coords[k])) for k in range(3)]
    psi = (np.einsum("pa,pi,pj,pk->aijk", pos, *ex, optimize=True)
           + np.einsum("pa,pi,pj,pk->aijk", neg, *(np.conj(e) for e in ex), optimize=True))
    return FieldSnapshot(spatial_grid=spatial_grid, psi=psi, time=float(t))


def mean_position_direct(snapshot: FieldSnapshot) -> np.ndarray:
    sg = snapshot.spatial_grid
    dens = snapshot.density()
    return np.array([sg.integrate(dens * xk) for xk in sg.mesh()])


def mean_velocity_direct(snapshot: FieldSnapshot) -> np.ndarray:
    psi = snapshot.psi
    integrand = np.real(np.einsum("axyz,kab,bxyz->kxyz", np.conj(psi), ALPHA, psi))
    return snapshot.spatial_grid.integrate(integrand)


def velocity_classic(amps: ModeAmplitudes) -> np.ndarray:
    grid = amps.grid
    occ = np.sum(np.abs(amps.c) ** 2 + np.abs(amps.d) ** 2, axis=1)
    return grid.integrate((occ / grid.energies)[:, None] * grid.nodes)


def velocity_zb(amps: ModeAmplitudes, t: float) -> np.ndarray:
    """Interference velocity, evaluated as a sum over (p, -p) node pairs.

    sum_p w (m/E) { sum c^*(-p,s') d^*(p,s) [u^dag(-p,s') alpha v(p,s)] e^{2iEt}
                  + sum d(-p,s') c(p,s) [v^dag(-p,s') alpha u(p,s)] e^{-2iEt} }
    """
    grid = amps.grid
    mc = _modes(grid)
    neg = grid.negation_map
    pair_w = np.sqrt(grid.weights * grid.weights[neg])
    if not np.array_equal(pair_w, grid.weights):
        raise AssertionError("pair weights differ from node weights on a symmetric grid")
    # u^dag(-p, s') alpha_k v(p, s) -> (p, s', s, k)
    uav = np.einsum("pra,kab,psb->prsk", np.conj(mc.u[neg]), ALPHA, mc.v)
    vau = np.einsum("pra,kab,psb->prsk", np.conj(mc.v[neg]), ALPHA, mc.u)
    up = np.einsum("pr,ps,prsk->pk", np.conj(amps.c[neg]), np.conj(amps.d), uav)
    down = np.einsum("pr,ps,prsk->pk", amps.d[neg], amps.c, vau)
    phase = np.exp(2j * mc.e * t)[:, None]
    scale = (mc.root ** 2)[:, None]
    total = grid.integrate(scale * (up * phase + down * np.conj(phase)))
    if np.abs(total.imag).max() > 1e-12 * max(1.0, np.abs(total.real).max()):
        raise AssertionError(f"interference velocity has imaginary part {total.imag}")
    return total.real


@dataclass
class Trajectory:
    times: np.ndarray
    X: np.ndarray
    V_direct: np.ndarray
    V_classic: np.ndarray
    V_zb: np.ndarray
    norms: np.ndarray = field(default=None)

    def oracle_gap(self) -> float:
        """max_t |V_direct - V_classic - V_zb|."""
        return float(np.abs(self.V_direct - self.V_classic[None, :] - self.V_zb).max())

    def rows(self) -> list[list[float]]:
        out = []
        for i, t in enumerate(self.times):
            norm = float(self.norms[i]) if self.norms is not None else float("nan")
            out.append([float(t), *self.X[i], *self.V_direct[i], *self.V_classic, *self.V_zb[i],
                        norm])
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRAJECTORY_HEADER)
            for row in self.rows():
                writer.writerow([f"{x:.17g}" for x in row])

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(times=data[:, 0], X=data[:, 1:4], V_direct=data[:, 4:7],
                   V_classic=data[0, 7:10], V_zb=data[:, 10:13], norms=data[:, 13])


def trajectory(amps: ModeAmplitudes, times, spatial_grid: SpatialGrid | None = None,
               n_points: int = 2048) -> Trajectory:
    times = np.asarray(times, dtype=float)
    sg = spatial_grid or auto_spatial_grid(amps.grid, n_points)
    X, V, Z, norms = [], [], [], []
    for t in times:
        snap = synthesize_field(amps, sg, t)
        X.append(mean_position_direct(snap))
        V.append(mean_velocity_direct(snap))
        Z.append(velocity_zb(amps, t))
        norms.append(snap.norm())
    return Trajectory(times=times, X=np.array(X), V_direct=np.array(V),
                      V_classic=velocity_classic(amps), V_zb=np.array(Z), norms=np.array(norms))


def zb_series(amps: ModeAmplitudes, times) -> np.ndarray:
    return np.array([velocity_zb(amps, t) for t in np.asarray(times, dtype=float)])


def dominant_frequency(series, times, pad_factor: int = 16, flat_tol: float = 1e-13):
    """Peak angular frequency of a uniformly sampled (vector) series.

    Hann window, zero padding and a parabola through the log power around
    the peak bin. Returns None for a flat series.
    """
    times = np.asarray(times, dtype=float)
    x = np.asarray(series, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if len(times) != len(x):
        raise ValueError("series and times differ in length")
    if len(times) < 64:
        raise ValueError("need at least 64 samples")
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-9, atol=0.0):
        raise ValueError("samples must be uniformly spaced")
    x = x - x.mean(axis=0)
    if np.abs(x).max() <= flat_tol:
        return None
    n = len(x)
    window = np.hanning(n)[:, None]
    nfft = pad_factor * (1 << int(np.ceil(np.log2(n))))
    power = np.sum(np.abs(np.fft.rfft(x * window, n=nfft, axis=0)) ** 2, axis=1)
    k = int(np.argmax(power[1:])) + 1
    if 1 <= k < len(power) - 1:
        a, b, c = np.log(power[k - 1:k + 2] + 1e-300)
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    else:
        shift = 0.0
    return float(2.0 * np.pi * (k + shift) / (nfft * dt))
