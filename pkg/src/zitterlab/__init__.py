"""Numerical study of zitterbewegung for free Dirac fields.

Modules: momentum_grid (quadrature nodes), spinor_algebra (Dirac matrices,
spinors, polarization triads), wavepacket (first-quantized packets),
fock (truncated Fock-space operators), noether (currents and continuity)
and cli (scenario runner).
"""

from .momentum_grid import MomentumGrid, build_symmetric_grid
from .wavepacket import ModeAmplitudes, gaussian_amplitudes, trajectory

__all__ = ["MomentumGrid", "build_symmetric_grid", "ModeAmplitudes", "gaussian_amplitudes",
           "trajectory"]
__version__ = "0.1.0"
