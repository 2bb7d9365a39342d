"""
Wave propagation through a stacked metasurface
==============================================

A stack of ``L`` metasurface layers, each a square lattice of ``M`` meta-atoms,
sits between the transmit antennas and the channel. Every meta-atom re-radiates
what it receives, so the field leaving the stack is a chain of diffraction
matrices interleaved with diagonal phase screens.
"""

# %%
# Build an architecture: two streams, three layers of 5x5 atoms per side,
# half-wavelength spacing at 28 GHz.
import numpy as np

from simhmimo import PhaseState, SimArchitecture, build_operators, tx_response
from simhmimo.geometry import TX, antenna_to_layer_distances, atom_index

wl = 0.0107
arch = SimArchitecture(S=2, L=3, K=3, M=25, N=25, r_et=wl / 2, t_er=wl / 2)
print(f"layer gap {1e3 * arch.d_t:.2f} mm, atom area {1e6 * arch.A_t:.2f} mm^2")

# %%
# Atoms are numbered row by row; the 13th atom is the lattice center.
print("atom 13 sits at (row, column)", tuple(atom_index(13, arch.m_max)))
D = antenna_to_layer_distances(arch, TX)
print("antenna-to-first-layer distances for atom 13 (mm):", np.round(1e3 * D[12], 3))

# %%
# The diffraction matrices depend on geometry only and are built once.
ops = build_operators(arch)
W2 = ops.W[1]
print("|W2| on the diagonal (straight ahead):", np.abs(W2[0, 0]).round(4))
print("|W2| to the far corner:", np.abs(W2[0, -1]).round(4))

# %%
# The phase screens are the only knobs. With every phase at zero the stack is
# plain free-space propagation; random phases scramble the radiated pattern.
rng = np.random.default_rng(0)
flat = tx_response(ops, PhaseState.zeros(ops))
scrambled = tx_response(ops, PhaseState.random(ops, rng))
print("beam power leaving the last layer, flat phases:     ", np.round(np.sum(np.abs(flat) ** 2, axis=0), 4))
print("beam power leaving the last layer, random phases:   ", np.round(np.sum(np.abs(scrambled) ** 2, axis=0), 4))
