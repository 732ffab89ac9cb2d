"""Negation-symmetric momentum grids.

Nodes sit at cell midpoints, so p = 0 is never a node and every node has
its mirror image -p on the grid. Sums of the form ``sum_p w(p) f(p)`` are the
midpoint-rule quadrature of the corresponding momentum integral.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

# Active Cartesian axes for each dimensionality. A 1D grid lives on the
# p_z axis on purpose: that is where the polarization triad needs its
# limiting form.
ACTIVE_AXES = {1: (2,), 2: (0, 1), 3: (0, 1, 2)}


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform midpoint grid in momentum space (natural units)."""

    dim: int
    p_max: float
    n_per_axis: int
    mass: float
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    negation_map: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim not in ACTIVE_AXES:
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if int(self.n_per_axis) != self.n_per_axis or self.n_per_axis <= 0:
            raise ValueError("n_per_axis must be a positive integer")
        if self.n_per_axis % 2:
            raise ValueError(
                f"n_per_axis={self.n_per_axis} is odd; an odd count puts a node at p = 0"
            )
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

        n = self.n_per_axis
        half = n // 2
        ks = np.arange(-half, half)
        offsets = (ks + 0.5) * self.dp
        axes = ACTIVE_AXES[self.dim]

        index_of = {}
        nodes = []
        for i, combo in enumerate(itertools.product(range(n), repeat=self.dim)):
            p = [0.0, 0.0, 0.0]
            for ax, k in zip(axes, combo):
                p[ax] = offsets[k]
            nodes.append(p)
            index_of[combo] = i
        nodes = np.array(nodes, dtype=float)
        # offsets[n-1-k] == -offsets[k] bitwise, so the map is exact
        neg = np.array(
            [index_of[tuple(n - 1 - k for k in combo)]
             for combo in itertools.product(range(n), repeat=self.dim)],
            dtype=int,
        )
        weights = np.full(len(nodes), self.dp ** self.dim)

        for name, arr in (("nodes", nodes), ("weights", weights), ("negation_map", neg)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dp(self) -> float:
        return 2.0 * self.p_max / self.n_per_axis

    @property
    def active_axes(self) -> tuple[int, ...]:
        return ACTIVE_AXES[self.dim]

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def energies(self) -> np.ndarray:
        return np.sqrt(np.sum(self.nodes ** 2, axis=1) + self.mass ** 2)

    @property
    def e_max(self) -> float:
        return float(self.energies.max())

    def axis_index(self, node: int) -> tuple[int, ...]:
        """Per-active-axis integer cell index of ``node`` (row-major order)."""
        return tuple(int(i) for i in np.unravel_index(node, (self.n_per_axis,) * self.dim))

    def node_at(self, cell: tuple[int, ...]) -> int:
        return int(np.ravel_multi_index(cell, (self.n_per_axis,) * self.dim))

    def period(self) -> float:
        """Spatial length over which every |psi|^2 built on this grid is periodic."""
        return 2.0 * np.pi / self.dp

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Midpoint quadrature ``sum_p w(p) values[p]`` along the first axis."""
        values = np.asarray(values)
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return np.sum(w * values, axis=0)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "p_max": self.p_max,
                "n_per_axis": self.n_per_axis, "mass": self.mass}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "MomentumGrid":
        return cls(dim=int(data["dim"]), p_max=float(data["p_max"]),
                   n_per_axis=int(data["n_per_axis"]), mass=float(data["mass"]))

    @classmethod
    def from_json(cls, text: str) -> "MomentumGrid":
        return cls.from_dict(json.loads(text))


def build_symmetric_grid(dim: int, p_max: float, n_per_axis: int, m: float) -> MomentumGrid:
    return MomentumGrid(dim=dim, p_max=p_max, n_per_axis=n_per_axis, mass=m)


def energy(grid: MomentumGrid, node_index: int) -> float:
    p = grid.nodes[node_index]
    return float(np.sqrt(p @ p + grid.mass ** 2))


def dispersion(p, m: float) -> float:
    """E = sqrt(|p|^2 + m^2) for a free Dirac particle of mass m > 0."""
    if not m > 0:
        raise ValueError("mass must be positive")
    p = np.asarray(p, dtype=float)
    return float(np.sqrt(p @ p + m * m))
