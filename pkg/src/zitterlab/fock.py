"""Truncated fermionic Fock space over the modes of a momentum grid.

Every node p carries four modes: electron (p, s) and positron (p, s) for
s = 1, 2. Ladder operators are Jordan-Wigner matrices in the occupation
basis, with mode j stored as bit j of the basis index.

Operators are written with continuum normalization absorbed into the
discrete ladders: sum_p w(p) c^dag(p) c(p) -> sum_k a_k^dag a_k, so a
one-particle state sum_k sqrt(w_k) c_k a_k^dag |0> has the same expectation
values as the first-quantized packet with amplitudes c_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .momentum_grid import MomentumGrid
from .spinor_algebra import (PAULI, SQRT2, circular_triad, energy_projector,
                             spin_frame)
from .wavepacket import ModeAmplitudes

MAX_MODES = 16
ELECTRON, POSITRON = "electron", "positron"


@dataclass(frozen=True)
class Mode:
    branch: str
    node: int
    s: int

    def __str__(self):
        name = "c" if self.branch == ELECTRON else "d"
        return f"{name}(node={self.node}, s={self.s})"


class ModeTable:
    """Electron block first, then positrons; node-major, then spin."""

    def __init__(self, grid: MomentumGrid):
        self.grid = grid
        self.modes = [Mode(branch, node, s)
                      for branch in (ELECTRON, POSITRON)
                      for node in range(grid.size)
                      for s in (1, 2)]
        self._index = {m: i for i, m in enumerate(self.modes)}

    def __len__(self):
        return len(self.modes)

    def index(self, branch: str, node: int, s: int) -> int:
        return self._index[Mode(branch, node, s)]


@dataclass
class FockOperator:
    matrix: sp.csr_matrix
    label: str = ""
    explicit_time: float | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T.tocsr(), self.label + "^dag", self.explicit_time)

    def hermiticity_residual(self) -> float:
        return max_abs(self.matrix - self.matrix.conj().T)

    def to_coo_text(self) -> str:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return "".join(f"{coo.row[i]} {coo.col[i]} {coo.data[i].real:.17g} {coo.data[i].imag:.17g}\n"
                       for i in order)


@dataclass
class VectorOperator:
    """Three Cartesian components of a vector-valued Fock operator."""

    components: tuple
    label: str = ""
    explicit_time: float | None = None

    def __getitem__(self, k) -> FockOperator:
        return FockOperator(self.components[k], f"{self.label}[{k}]", self.explicit_time)

    def __add__(self, other: "VectorOperator") -> "VectorOperator":
        return VectorOperator(tuple(a + b for a, b in zip(self.components, other.components)),
                              f"{self.label}+{other.label}", self.explicit_time)

    def __sub__(self, other: "VectorOperator") -> "VectorOperator":
        return VectorOperator(tuple(a - b for a, b in zip(self.components, other.components)),
                              f"{self.label}-{other.label}", self.explicit_time)

    def scaled(self, factor: float) -> "VectorOperator":
        return VectorOperator(tuple(factor * a for a in self.components), self.label,
                              self.explicit_time)

    def max_abs(self) -> float:
        return max(max_abs(a) for a in self.components)

    def hermiticity_residual(self) -> float:
        return max(max_abs(a - a.conj().T) for a in self.components)

    def expectation(self, state: np.ndarray) -> np.ndarray:
        return np.array([np.vdot(state, a @ state) for a in self.components])


def max_abs(mat) -> float:
    mat = sp.csr_matrix(mat)
    return float(np.abs(mat.data).max()) if mat.nnz else 0.0


def hermitize(mat):
    return 0.5 * (mat + mat.conj().T)


def _jw_annihilator(j: int, n_modes: int) -> sp.csr_matrix:
    dim = 1 << n_modes
    states = np.arange(dim, dtype=np.int64)
    occupied = states[(states >> j) & 1 == 1]
    lower = occupied & ((1 << j) - 1)
    parity = np.zeros_like(lower)
    for b in range(j):
        parity += (lower >> b) & 1
    data = np.where(parity % 2 == 0, 1.0, -1.0).astype(complex)
    return sp.csr_matrix((data, (occupied ^ (1 << j), occupied)), shape=(dim, dim))


def finite_difference_matrix(grid: MomentumGrid, axis: int) -> np.ndarray:
    """d/dp_axis on the grid lines: central inside, one-sided 2nd order at the ends.

    With only two nodes per axis the single available difference quotient is
    used at both nodes. Every stencil here is odd under p -> -p, which the
    positron term of X1 relies on.
    ``axis`` is a Cartesian index (0, 1, 2) that must be active on the grid.
    """
    if axis not in grid.active_axes:
        raise ValueError(f"axis {axis} is not active on a dim={grid.dim} grid")
    n = grid.n_per_axis
    slot = grid.active_axes.index(axis)
    h = grid.dp
    D = np.zeros((grid.size, grid.size))
    for node in range(grid.size):
        cell = list(grid.axis_index(node))
        k = cell[slot]

        def at(kk):
            c = list(cell)
            c[slot] = kk
            return grid.node_at(tuple(c))

        if n == 2:
            D[node, at(0)] += -1.0 / h
            D[node, at(1)] += 1.0 / h
        elif k == 0:
            D[node, at(0)] += -3.0 / (2 * h)
            D[node, at(1)] += 4.0 / (2 * h)
            D[node, at(2)] += -1.0 / (2 * h)
        elif k == n - 1:
            D[node, at(n - 1)] += 3.0 / (2 * h)
            D[node, at(n - 2)] += -4.0 / (2 * h)
            D[node, at(n - 3)] += 1.0 / (2 * h)
        else:
            D[node, at(k + 1)] += 1.0 / (2 * h)
            D[node, at(k - 1)] += -1.0 / (2 * h)
    return D


class FockSpace:
    """Ladder operators and observables over the truncated mode set."""

    def __init__(self, grid: MomentumGrid, max_modes: int = MAX_MODES):
        self.grid = grid
        self.table = ModeTable(grid)
        self.n_modes = len(self.table)
        if self.n_modes > max_modes:
            raise ValueError(
                f"{self.n_modes} modes requested but the cap is {max_modes}: "
                f"the Fock dimension 2^{self.n_modes} grows exponentially")
        self.dim = 1 << self.n_modes
        self._annihilators = [_jw_annihilator(j, self.n_modes) for j in range(self.n_modes)]
        self._creators = [a.conj().T.tocsr() for a in self._annihilators]

    # -- ladders -----------------------------------------------------------
    def ladder(self, kind: str, branch: str, node: int, s: int) -> FockOperator:
        j = self.table.index(branch, node, s)
        if kind == "annihilate":
            mat = self._annihilators[j]
        elif kind == "create":
            mat = self._creators[j]
        else:
            raise ValueError(f"kind must be 'create' or 'annihilate', got {kind!r}")
        sym = ("c" if branch == ELECTRON else "d") + ("^dag" if kind == "create" else "")
        return FockOperator(mat, f"{sym}({node},{s})")

    def c(self, node, s):
        return self._annihilators[self.table.index(ELECTRON, node, s)]

    def cd(self, node, s):
        return self._creators[self.table.index(ELECTRON, node, s)]

    def d(self, node, s):
        return self._annihilators[self.table.index(POSITRON, node, s)]

    def dd(self, node, s):
        return self._creators[self.table.index(POSITRON, node, s)]

    def zero(self):
        return sp.csr_matrix((self.dim, self.dim), dtype=complex)

    def identity(self):
        return sp.identity(self.dim, dtype=complex, format="csr")

    # -- states ------------------------------------------------------------
    def vacuum(self) -> np.ndarray:
        state = np.zeros(self.dim, dtype=complex)
        state[0] = 1.0
        return state

    # -- global observables -------------------------------------------------
    @cached_property
    def number(self):
        return sum((self._creators[j] @ self._annihilators[j] for j in range(self.n_modes)),
                   self.zero())

    @cached_property
    def charge(self):
        out = self.zero()
        for node in range(self.grid.size):
            for s in (1, 2):
                out = out + self.cd(node, s) @ self.c(node, s) - self.dd(node, s) @ self.d(node, s)
        return out

    @cached_property
    def momentum(self) -> tuple:
        comps = []
        for k in range(3):
            out = self.zero()
            for node, p in enumerate(self.grid.nodes):
                if p[k] == 0.0:
                    continue
                for s in (1, 2):
                    out = out + p[k] * (self.cd(node, s) @ self.c(node, s)
                                        + self.dd(node, s) @ self.d(node, s))
            comps.append(out)
        return tuple(comps)

    @cached_property
    def derivative_matrices(self) -> dict:
        return {ax: finite_difference_matrix(self.grid, ax) for ax in self.grid.active_axes}


def car_residual(space: FockSpace) -> float:
    """max over mode pairs of |{a_i, a_j^dag} - delta_ij| and |{a_i, a_j}|."""
    eye = space.identity()
    worst = 0.0
    for i, a in enumerate(space._annihilators):
        for j in range(i, space.n_modes):
            b, bd = space._annihilators[j], space._creators[j]
            mixed = a @ bd + bd @ a
            if i == j:
                mixed = mixed - eye
            worst = max(worst, max_abs(mixed), max_abs(a @ b + b @ a))
    return worst


# -- the operator decomposition -------------------------------------------

def _pair_channels(space: FockSpace, reading: str):
    """Per node: (E, eta_plus at p, eta_plus for the annihilation term, eta_par)."""
    if reading not in ("electron_momentum", "literal"):
        raise ValueError(f"unknown channel reading {reading!r}")
    grid = space.grid
    out = []
    for node, p in enumerate(grid.nodes):
        mirror = grid.negation_map[node]
        tri = circular_triad(p)
        eta_ann = circular_triad(grid.nodes[mirror]).eta_plus if reading == "electron_momentum" \
            else tri.eta_plus
        out.append((float(np.sqrt(p @ p + grid.mass ** 2)), mirror, tri.eta_plus, eta_ann,
                    tri.eta_par))
    return out


def _vector_sum(space: FockSpace, terms) -> tuple:
    """Sum coefficient-vector * operator terms into three sparse components."""
    comps = [space.zero() for _ in range(3)]
    for vec, op in terms:
        for k in range(3):
            if vec[k] != 0:
                comps[k] = comps[k] + vec[k] * op
    return tuple(c.tocsr() for c in comps)


def _transverse_terms(space, t, reading, position: bool):
    terms = []
    for node, (e, mirror, eta_p, eta_ann, _) in enumerate(_pair_channels(space, reading)):
        phase = np.exp(2j * e * t)
        create = space.cd(node, 2) @ space.dd(mirror, 1)
        annihilate = space.c(mirror, 1) @ space.d(node, 2)
        if position:
            coef = -1j / (SQRT2 * e)
            op_vec = [(coef * eta_p * phase, create), (coef * eta_ann * np.conj(phase), annihilate)]
        else:
            op_vec = [(SQRT2 * eta_p * phase, create), (-SQRT2 * eta_ann * np.conj(phase), annihilate)]
        terms.extend(op_vec)
    raw = _vector_sum(space, terms)
    return tuple((a + a.conj().T).tocsr() for a in raw)


def _longitudinal_terms(space, t, position: bool):
    m = space.grid.mass
    terms = []
    for node, (e, mirror, _, _, eta_par) in enumerate(_pair_channels(space, "literal")):
        phase = np.exp(2j * e * t)
        pair = space.cd(node, 1) @ space.dd(mirror, 1) - space.cd(node, 2) @ space.dd(mirror, 2)
        coef = -1j * m / (2 * e * e) if position else m / e
        terms.append((coef * eta_par * phase, pair))
    raw = _vector_sum(space, terms)
    return tuple((a + a.conj().T).tocsr() for a in raw)


def _number_terms(space, scale_t: float):
    grid = space.grid
    terms = []
    for node, p in enumerate(grid.nodes):
        e = np.sqrt(p @ p + grid.mass ** 2)
        for s in (1, 2):
            op = space.cd(node, s) @ space.c(node, s) - space.dd(node, s) @ space.d(node, s)
            terms.append((scale_t * p / e, op))
    return _vector_sum(space, terms)


def _x1_terms(space, normal_ordered: bool = False):
    comps = [space.zero() for _ in range(3)]
    for ax, D in space.derivative_matrices.items():
        acc = space.zero()
        rows, cols = np.nonzero(D)
        for p, q in zip(rows, cols):
            coef = D[p, q]
            for s in (1, 2):
                # [(-i d/dp) c^dag] c  ->  -i D_pq c^dag_q c_p
                acc = acc + (-1j * coef) * (space.cd(q, s) @ space.c(p, s))
                # [(i d/dp) d] d^dag  ->  i D_pq d_q d^dag_p
                if normal_ordered:
                    dd_term = -(space.dd(p, s) @ space.d(q, s))
                    if p == q:
                        dd_term = dd_term + space.identity()
                else:
                    dd_term = space.d(q, s) @ space.dd(p, s)
                acc = acc + (1j * coef) * dd_term
        comps[ax] = hermitize(acc).tocsr()
    return tuple(c.tocsr() for c in comps)


def position_operator_parts(space: FockSpace, t: float, reading: str = "electron_momentum",
                            normal_ordered: bool = False) -> dict:
    """X0, X1, Xzperp, Xzpar as VectorOperators at time t.

    ``reading`` selects the momentum at which the polarization vector of the
    annihilation term c(-p,1) d(p,2) is evaluated: "electron_momentum" uses
    eta_plus(-p), "literal" uses eta_plus(p). Only the former agrees with the
    brute-force construction.
    """
    parts = {
        "X0": VectorOperator(_number_terms(space, t), "X0", t),
        "X1": VectorOperator(_x1_terms(space, normal_ordered), "X1", None),
        "Xzperp": VectorOperator(_transverse_terms(space, t, reading, True), "Xzperp", t),
        "Xzpar": VectorOperator(_longitudinal_terms(space, t, True), "Xzpar", t),
    }
    return parts


def current_operator_parts(space: FockSpace, t: float, reading: str = "electron_momentum") -> dict:
    return {
        "Vclassic": VectorOperator(_number_terms(space, 1.0), "Vclassic", None),
        "Zperp": VectorOperator(_transverse_terms(space, t, reading, False), "Zperp", t),
        "Zpar": VectorOperator(_longitudinal_terms(space, t, False), "Zpar", t),
    }


def total_position(parts: dict) -> VectorOperator:
    total = None
    for key in ("X0", "X1", "Xzperp", "Xzpar"):
        total = parts[key] if total is None else total + parts[key]
    return total


def derivative_identity_check(space: FockSpace, t: float, dt: float,
                              reading: str = "electron_momentum") -> dict:
    """Central differences in t of the position parts against the current parts."""
    e_max = space.grid.e_max
    if dt > 1e-4 / e_max * (1 + 1e-12):
        raise ValueError(f"dt must be <= 1e-4/E_max = {1e-4 / e_max:.3g}")
    plus = position_operator_parts(space, t + dt, reading)
    minus = position_operator_parts(space, t - dt, reading)
    cur = current_operator_parts(space, t, reading)
    report = {}
    for xkey, vkey in (("X0", "Vclassic"), ("Xzperp", "Zperp"), ("Xzpar", "Zpar")):
        fd = (plus[xkey] - minus[xkey]).scaled(1.0 / (2 * dt))
        resid = (fd - cur[vkey]).max_abs()
        # Taylor remainder of a central difference on e^{+-2iEt}, plus cancellation error
        taylor = 0.0 if xkey == "X0" else (2 * e_max) ** 2 * dt ** 2 / 6.0 * cur[vkey].max_abs()
        roundoff = 64 * np.finfo(float).eps * max(plus[xkey].max_abs(), minus[xkey].max_abs()) / dt
        bound = taylor * (1 + 1e-6) + roundoff
        report[xkey] = {"residual": resid, "bound": bound, "passed": bool(resid <= bound)}
    r1 = (plus["X1"] - minus["X1"]).max_abs()
    report["X1"] = {"residual": r1, "bound": 0.0, "passed": r1 == 0.0}
    report["max_residual"] = max(v["residual"] for v in report.values())
    report["passed"] = all(v["passed"] for k, v in report.items() if isinstance(v, dict))
    return report


# -- states ----------------------------------------------------------------

def one_particle_state(space: FockSpace, amps: ModeAmplitudes) -> np.ndarray:
    """sum_k sqrt(w_k) [c(k,s) c^dag + d(k,s) d^dag] |0>, normalized."""
    if amps.grid.to_dict() != space.grid.to_dict():
        raise ValueError("amplitudes live on a different grid")
    vac = space.vacuum()
    state = np.zeros(space.dim, dtype=complex)
    root_w = np.sqrt(space.grid.weights)
    for node in range(space.grid.size):
        for s in (1, 2):
            if amps.c[node, s - 1] != 0:
                state += root_w[node] * amps.c[node, s - 1] * (space.cd(node, s) @ vac)
            if amps.d[node, s - 1] != 0:
                state += root_w[node] * amps.d[node, s - 1] * (space.dd(node, s) @ vac)
    norm = np.linalg.norm(state)
    if norm == 0:
        raise ValueError("empty one-particle state")
    return state / norm


def pair_superposition_state(space: FockSpace, node: int, s_e: int = 2, s_p: int = 1,
                             phase: float = 0.0) -> np.ndarray:
    """(|0> + e^{i phase} c^dag(p, s_e) d^dag(-p, s_p) |0>) / sqrt(2)."""
    vac = space.vacuum()
    mirror = space.grid.negation_map[node]
    pair = space.cd(node, s_e) @ (space.dd(mirror, s_p) @ vac)
    return (vac + np.exp(1j * phase) * pair) / np.sqrt(2.0)


def expectation(op, state: np.ndarray):
    if isinstance(op, VectorOperator):
        return op.expectation(state)
    mat = op.matrix if isinstance(op, FockOperator) else op
    return np.vdot(state, mat @ state)


# -- brute-force oracle ------------------------------------------------------

def _frozen_derivatives(p: np.ndarray, m: float, frame: np.ndarray, branch: str) -> np.ndarray:
    """d/dp_k of sqrt(m/E) * spinor at p with the spin frame held fixed.

    Returns (3, 2, 4): derivative direction, spin label, component.
    """
    e = np.sqrt(p @ p + m * m)
    s_amp = np.sqrt((e + m) / (2 * e))
    ds_de = -m / (4 * e * e * s_amp)
    sp_mat = np.einsum("k,kij->ij", p, PAULI) / (e + m)
    out = np.empty((3, 2, 4), dtype=complex)
    for k in range(3):
        ds = ds_de * p[k] / e
        dM = PAULI[k] / (e + m) - np.einsum("k,kij->ij", p, PAULI) * p[k] / (e * (e + m) ** 2)
        for s in range(2):
            chi = frame[:, s]
            if branch == "u":
                out[k, s] = np.concatenate([ds * chi, ds * (sp_mat @ chi) + s_amp * (dM @ chi)])
            else:
                out[k, s] = np.concatenate([ds * (sp_mat @ chi) + s_amp * (dM @ chi), ds * chi])
    return out


def _mode_functions(p: np.ndarray, m: float, frame: np.ndarray, branch: str) -> np.ndarray:
    e = np.sqrt(p @ p + m * m)
    s_amp = np.sqrt((e + m) / (2 * e))
    sp_mat = np.einsum("k,kij->ij", p, PAULI) / (e + m)
    out = np.empty((2, 4), dtype=complex)
    for s in range(2):
        chi = frame[:, s]
        out[s] = s_amp * (np.concatenate([chi, sp_mat @ chi]) if branch == "u"
                          else np.concatenate([sp_mat @ chi, chi]))
    return out


def brute_force_position(space: FockSpace, t: float) -> VectorOperator:
    """X = sum_p w phi^dag(p) (i d/dp) phi(p), assembled from the mode expansion.

    phi(p) = sum_s [f_u(p,s) e^{-iEt} c(p,s) + f_v(-p,s) e^{iEt} d^dag(-p,s)] is the
    spatial Fourier transform of the field operator, f = sqrt(m/E) * spinor.
    d/dp acts analytically on spinors and phases and by the grid stencil on
    ladder operators (along active axes). Spin frames are parallel-transported:
    the derivative of a mode function is projected off its own energy
    subspace, so labels at neighbouring momenta are identified without a
    Berry-connection term.
    """
    grid = space.grid
    m = grid.mass
    derivs = space.derivative_matrices
    comps = [space.zero() for _ in range(3)]
    for node, p in enumerate(grid.nodes):
        mirror = grid.negation_map[node]
        e = float(np.sqrt(p @ p + m * m))
        ph_u, ph_v = np.exp(-1j * e * t), np.exp(1j * e * t)
        frame_u = spin_frame(p)
        frame_v = spin_frame(-grid.nodes[mirror])  # v(-p, s) carries the frame at p
        f_u = _mode_functions(p, m, frame_u, "u")
        f_v = _mode_functions(grid.nodes[mirror], m, frame_v, "v")
        df_u = _frozen_derivatives(p, m, frame_u, "u")
        # f_v(-p) as a function of p: chain rule gives a minus sign
        df_v = -_frozen_derivatives(grid.nodes[mirror], m, frame_v, "v")
        proj_neg = energy_projector(p, m, -1)
        proj_pos = energy_projector(p, m, +1)
        df_u = np.einsum("ab,ksb->ksa", proj_neg, df_u)
        df_v = np.einsum("ab,ksb->ksa", proj_pos, df_v)

        c_ops = [space.c(node, s) for s in (1, 2)]
        d_ops = [space.dd(mirror, s) for s in (1, 2)]
        for a in range(4):
            phi = sum((f_u[s, a] * ph_u) * c_ops[s] + (f_v[s, a] * ph_v) * d_ops[s]
                      for s in range(2))
            phi_dag = phi.conj().T
            for k in range(3):
                dphi = sum((df_u[k, s, a] * ph_u) * c_ops[s] + (df_v[k, s, a] * ph_v) * d_ops[s]
                           for s in range(2))
                # explicit time phases
                dphi = dphi + (-1j * t * p[k] / e) * sum((f_u[s, a] * ph_u) * c_ops[s]
                                                         for s in range(2))
                dphi = dphi + (1j * t * p[k] / e) * sum((f_v[s, a] * ph_v) * d_ops[s]
                                                        for s in range(2))
                if k in derivs:
                    D = derivs[k]
                    for q in np.nonzero(D[node])[0]:
                        qm = grid.negation_map[q]
                        for s in range(2):
                            dphi = dphi + D[node, q] * (
                                (f_u[s, a] * ph_u) * space.c(q, s + 1)
                                + (f_v[s, a] * ph_v) * space.dd(qm, s + 1))
                comps[k] = comps[k] + 1j * (phi_dag @ dphi)
    return VectorOperator(tuple(hermitize(c).tocsr() for c in comps), "X_brute", t)


def _monomial_report(space: FockSpace, diff: VectorOperator, top: int = 3) -> list:
    """Largest quadratic ladder coefficients of a (vector) operator difference."""
    vac = space.vacuum()
    n = space.n_modes
    found = []
    for k, mat in enumerate(diff.components):
        v0 = np.vdot(vac, mat @ vac)
        for i in range(n):
            ai_dag_vac = space._creators[i] @ vac
            for j in range(n):
                # a_i^dag a_j coefficient
                aj_dag_vac = space._creators[j] @ vac
                coef = np.vdot(ai_dag_vac, mat @ aj_dag_vac) - (v0 if i == j else 0)
                if abs(coef) > 0:
                    found.append((abs(coef), k, f"{space.table.modes[i]}^dag {space.table.modes[j]}",
                                  complex(coef)))
                if i < j:
                    # a_i^dag a_j^dag coefficient
                    pair = space._creators[i] @ (space._creators[j] @ vac)
                    coef = np.vdot(pair, mat @ vac)
                    if abs(coef) > 0:
                        found.append((abs(coef), k,
                                      f"{space.table.modes[i]}^dag {space.table.modes[j]}^dag",
                                      complex(coef)))
    found.sort(key=lambda item: -item[0])
    return [{"component": k, "monomial": name, "coefficient": [c.real, c.imag], "abs": a}
            for a, k, name, c in found[:top]]


@dataclass
class OracleReport:
    time: float
    max_deviation: float
    tolerance: float
    reading: str
    worst_monomials: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def brute_force_decomposition_oracle(space: FockSpace, t: float, tol: float = 1e-10,
                                     reading: str = "electron_momentum") -> OracleReport:
    if space.grid.size > 4:
        raise ValueError("the brute-force oracle is meant for at most 2 node pairs")
    brute = brute_force_position(space, t)
    parts = position_operator_parts(space, t, reading)
    diff = brute - total_position(parts)
    dev = diff.max_abs()
    report = OracleReport(time=t, max_deviation=dev, tolerance=tol,
                          reading=reading)
    if dev > tol:
        report.worst_monomials = _monomial_report(space, diff)
    return report
