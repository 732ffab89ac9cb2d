"""Dirac matrices, momentum-space spinors and the polarization triads.

Standard (Dirac) representation throughout: beta = diag(1, 1, -1, -1),
alpha_k = [[0, sigma_k], [sigma_k, 0]], gamma^0 = beta, gamma^k = beta alpha_k.

Spin labels are helicities: s = 1 is spin +1/2 along p/|p|, s = 2 is -1/2.
The two-component helicity frame at p is the SU(2) lift of the linear triad
{e1, e2, e3}: chi_1 = U(1, 0), chi_2 = U(0, 1) with U sigma_k U^dag = sigma.e_k.
The antiparticle spinor v(p, s) carries the frame of -p in its lower
components, which is what pairs c^dag(p, s') with d^dag(-p, s) cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)
AXIS_TOL = 1e-24

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class DiracSet:
    alpha: np.ndarray  # (3, 4, 4)
    beta: np.ndarray  # (4, 4)
    gamma: np.ndarray  # (4, 4, 4), gamma[0] = beta, gamma[k] = beta alpha_k


@dataclass(frozen=True)
class Spinor4:
    components: np.ndarray
    momentum: np.ndarray
    spin_label: int
    branch: str  # "u" or "v"
    mass: float

    @property
    def energy(self) -> float:
        return float(np.sqrt(self.momentum @ self.momentum + self.mass ** 2))

    @property
    def bar(self) -> np.ndarray:
        return dirac_adjoint(self.components)


@dataclass(frozen=True)
class Triad:
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """Rotation matrix with columns e1, e2, e3."""
        return np.column_stack([self.e1, self.e2, self.e3])


@dataclass(frozen=True)
class CircTriad:
    eta_plus: np.ndarray
    eta_minus: np.ndarray
    eta_par: np.ndarray


def dirac_matrices() -> DiracSet:
    zero = np.zeros((2, 2), dtype=complex)
    eye = np.eye(2, dtype=complex)
    alpha = np.array([np.block([[zero, s], [s, zero]]) for s in PAULI])
    beta = np.block([[eye, zero], [zero, -eye]])
    gamma = np.array([beta] + [beta @ a for a in alpha])
    for arr in (alpha, beta, gamma):
        arr.setflags(write=False)
    return DiracSet(alpha=alpha, beta=beta, gamma=gamma)


_DIRAC = dirac_matrices()
ALPHA, BETA, GAMMA = _DIRAC.alpha, _DIRAC.beta, _DIRAC.gamma


def dirac_adjoint(psi: np.ndarray) -> np.ndarray:
    """psi-bar = psi^dag beta for a spinor stored along the last axis."""
    return np.conj(psi) @ BETA


def dirac_hamiltonian(p, m: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.einsum("k,kij->ij", p, ALPHA) + m * BETA


def energy_projector(p, m: float, sign: int = +1) -> np.ndarray:
    """(E + sign*H(p)) / 2E, the projector on energy sign*E."""
    p = np.asarray(p, dtype=float)
    e = np.sqrt(p @ p + m * m)
    return (e * np.eye(4) + sign * dirac_hamiltonian(p, m)) / (2.0 * e)


def _check_nonzero(p) -> tuple[np.ndarray, float]:
    p = np.asarray(p, dtype=float)
    norm = float(np.sqrt(p @ p))
    if norm == 0.0:
        raise ValueError("the polarization triad is undefined at p = 0")
    return p, norm


def linear_triad(p) -> Triad:
    p, norm = _check_nonzero(p)
    p1, p2, p3 = p
    rho2 = p1 * p1 + p2 * p2
    e3 = p / norm
    if rho2 < AXIS_TOL * norm * norm:
        # limit along p2 = 0 of the closed form
        return Triad(np.array([p3 / norm, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), e3)
    # (|p| - p3) / rho^2, written to avoid cancellation on the upper half-space
    if p3 >= 0:
        a = 1.0 / (norm + p3)
    else:
        a = (norm - p3) / rho2
    e1 = np.array([p3 / norm + p2 * p2 * a / norm, -p1 * p2 * a / norm, -p1 / norm])
    e2 = np.array([-p1 * p2 * a / norm, p3 / norm + p1 * p1 * a / norm, -p2 / norm])
    return Triad(e1, e2, e3)


def circular_triad(p) -> CircTriad:
    t = linear_triad(p)
    eta_plus = (t.e1 + 1j * t.e2) / SQRT2
    return CircTriad(eta_plus=eta_plus, eta_minus=np.conj(eta_plus), eta_par=t.e3.astype(complex))


def circular_triad_closed_form(p) -> CircTriad:
    """eta vectors written directly in Cartesian components (off the p3 axis only)."""
    p, norm = _check_nonzero(p)
    p1, p2, p3 = p
    den = p1 - 1j * p2
    if abs(den) ** 2 < AXIS_TOL * norm * norm:
        raise ValueError("closed form is singular on the p3 axis")
    eta_plus = np.array(
        [(p1 * p3 - 1j * p2 * norm) / den, (p2 * p3 + 1j * p1 * norm) / den, -(p1 + 1j * p2)]
    ) / (SQRT2 * norm)
    return CircTriad(eta_plus=eta_plus, eta_minus=np.conj(eta_plus),
                     eta_par=(p / norm).astype(complex))


def spin1_matrices() -> np.ndarray:
    """tau_k with (tau_k)_ij = -i epsilon_kij."""
    tau = np.zeros((3, 3, 3), dtype=complex)
    tau[0, 1, 2], tau[0, 2, 1] = -1j, 1j
    tau[1, 0, 2], tau[1, 2, 0] = 1j, -1j
    tau[2, 0, 1], tau[2, 1, 0] = -1j, 1j
    return tau


TAU = spin1_matrices()


def helicity_matrix(p) -> np.ndarray:
    p, norm = _check_nonzero(p)
    return np.einsum("k,kij->ij", p / norm, TAU)


def spin_frame(p) -> np.ndarray:
    """2x2 unitary whose columns are the helicity spinors chi_1, chi_2 at p.

    At p = 0 the frame is the identity (spin quantized along z).
    """
    p = np.asarray(p, dtype=float)
    if not np.any(p):
        return np.eye(2, dtype=complex)
    t = linear_triad(p)
    nx, ny, nz = t.e3
    if nz >= 0:
        chi1 = np.array([1.0 + nz, nx + 1j * ny]) / np.sqrt(2.0 * (1.0 + nz))
    else:
        chi1 = np.array([nx - 1j * ny, 1.0 - nz]) / np.sqrt(2.0 * (1.0 - nz))
    chi2 = np.array([-np.conj(chi1[1]), np.conj(chi1[0])])
    # fix the residual U(1) phase so that chi_1^dag (sigma.e1) chi_2 = 1
    z = np.conj(chi1) @ np.einsum("k,kij->ij", t.e1, PAULI) @ chi2
    phase = np.exp(0.5j * np.angle(z))
    return np.column_stack([chi1 * phase, chi2 / phase])


def _spinor_array(p: np.ndarray, s: int, branch: str, m: float) -> np.ndarray:
    if s not in (1, 2):
        raise ValueError(f"spin label must be 1 or 2, got {s}")
    e = np.sqrt(p @ p + m * m)
    norm = np.sqrt((e + m) / (2.0 * m))
    sp = np.einsum("k,kij->ij", p, PAULI) / (e + m)
    if branch == "u":
        chi = spin_frame(p)[:, s - 1]
        return norm * np.concatenate([chi, sp @ chi])
    if branch == "v":
        xi = spin_frame(-p)[:, s - 1]
        return norm * np.concatenate([sp @ xi, xi])
    raise ValueError(f"branch must be 'u' or 'v', got {branch!r}")


def make_spinor(p, s: int, branch: str, m: float) -> Spinor4:
    if not m > 0:
        raise ValueError("mass must be positive")
    p = np.asarray(p, dtype=float)
    return Spinor4(components=_spinor_array(p, s, branch, m), momentum=p.copy(),
                   spin_label=s, branch=branch, mass=float(m))


def spinor_table(nodes: np.ndarray, m: float) -> tuple[np.ndarray, np.ndarray]:
    """u and v spinors for every node, each shaped (n_nodes, 2, 4)."""
    nodes = np.asarray(nodes, dtype=float)
    u = np.empty((len(nodes), 2, 4), dtype=complex)
    v = np.empty_like(u)
    for i, p in enumerate(nodes):
        for s in (1, 2):
            u[i, s - 1] = _spinor_array(p, s, "u", m)
            v[i, s - 1] = _spinor_array(p, s, "v", m)
    return u, v


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def clifford_residual() -> float:
    """max |{gamma^mu, gamma^nu} - 2 g^{mu nu}| over all index pairs."""
    worst = 0.0
    for mu in range(4):
        for nu in range(4):
            diff = anticommutator(GAMMA[mu], GAMMA[nu]) - 2.0 * METRIC[mu, nu] * np.eye(4)
            worst = max(worst, float(np.abs(diff).max()))
    return worst


def matrices_as_json(dirac: DiracSet | None = None) -> dict:
    """Nested [re, im] lists, for debugging dumps."""
    dirac = dirac or _DIRAC

    def encode(mat):
        return [[[float(z.real), float(z.imag)] for z in row] for row in mat]

    return {
        "alpha": [encode(a) for a in dirac.alpha],
        "beta": encode(dirac.beta),
        "gamma": [encode(g) for g in dirac.gamma],
    }


def triad_residuals(p) -> dict:
    """Orthonormality, handedness, conjugation and spin-1 eigen-residuals at p."""
    t = linear_triad(p)
    c = circular_triad(p)
    R = t.as_matrix()
    hel = helicity_matrix(p)
    return {
        "orthonormality": float(np.abs(R.T @ R - np.eye(3)).max()),
        "handedness": float(np.abs(np.cross(t.e1, t.e2) - t.e3).max()),
        "conjugation": float(np.abs(c.eta_minus - np.conj(c.eta_plus)).max()),
        "eigen": float(max(np.abs(hel @ c.eta_plus - c.eta_plus).max(),
                           np.abs(hel @ c.eta_minus + c.eta_minus).max(),
                           np.abs(hel @ c.eta_par).max())),
    }


def axis_limit_residual(eps: float = 1e-8) -> float:
    """Distance between the on-axis triad and the triad a step eps off the axis.

    Approaches the north pole from the p1 and p2 directions and the south pole
    along p2 = 0, where the closed form defines its limit.
    """
    worst = 0.0
    for axis_point, offsets in (((0.0, 0.0, 1.0), ((eps, 0.0, 0.0), (0.0, eps, 0.0),
                                                    (-eps, 0.0, 0.0), (0.0, -eps, 0.0))),
                                ((0.0, 0.0, -1.0), ((eps, 0.0, 0.0), (-eps, 0.0, 0.0)))):
        on = linear_triad(axis_point).as_matrix()
        for off in offsets:
            near = linear_triad(np.add(axis_point, off)).as_matrix()
            worst = max(worst, float(np.abs(near - on).max()))
    return worst
