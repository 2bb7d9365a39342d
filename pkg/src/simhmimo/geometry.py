"""Meta-atom lattice indexing and the distances used by the propagation model.

Atom indices are 1-based, as in the lattice formulas: atom ``m`` of a layer
with ``row_len`` atoms per row sits at row ``ceil(m / row_len)`` and column
``mod(m - 1, row_len) + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

TX = "tx"
RX = "rx"


class LatticeIndex(NamedTuple):
    z: int
    x: int


def _row_len(count: int, name: str) -> int:
    root = math.isqrt(count)
    if root * root != count:
        raise ValueError(f"{name}={count} is not a perfect square")
    return root


@dataclass(frozen=True)
class SimArchitecture:
    """Static description of one SIM-aided link.

    Lengths are in meters. The inter-layer gaps ``d_t`` and ``d_r`` are
    derived from the SIM thicknesses and never stored on their own. Atom
    areas default to a full lattice cell (``r_et**2`` and ``t_er**2``).
    """

    S: int
    L: int
    K: int
    M: int
    N: int
    r_et: float
    t_er: float
    D_t: float = 0.05
    D_r: float = 0.05
    wavelength: float = 0.0107
    area_tx: Optional[float] = None
    area_rx: Optional[float] = None
    m_max: int = field(init=False, repr=False)
    n_max: int = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("S", "L", "K", "M", "N"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.M < self.S:
            raise ValueError(f"M >= S violated: M={self.M}, S={self.S}")
        if self.N < self.S:
            raise ValueError(f"N >= S violated: N={self.N}, S={self.S}")
        for name in ("r_et", "t_er", "D_t", "D_r", "wavelength"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("area_tx", "area_rx"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be strictly positive")
        object.__setattr__(self, "m_max", _row_len(self.M, "M"))
        object.__setattr__(self, "n_max", _row_len(self.N, "N"))

    @property
    def d_t(self) -> float:
        return self.D_t / self.L

    @property
    def d_r(self) -> float:
        return self.D_r / self.K

    @property
    def A_t(self) -> float:
        return self.r_et**2 if self.area_tx is None else self.area_tx

    @property
    def A_r(self) -> float:
        return self.t_er**2 if self.area_rx is None else self.area_rx

    def side(self, side: str):
        """Return ``(atoms, row_len, spacing, layer_gap, area)`` for one SIM."""
        if side == TX:
            return self.M, self.m_max, self.r_et, self.d_t, self.A_t
        if side == RX:
            return self.N, self.n_max, self.t_er, self.d_r, self.A_r
        raise ValueError(f"side must be {TX!r} or {RX!r}, got {side!r}")


def atom_index(m: int, row_len: int) -> LatticeIndex:
    if row_len < 1 or not 1 <= m <= row_len * row_len:
        raise ValueError(f"atom index {m} out of range for row length {row_len}")
    return LatticeIndex(z=-(-m // row_len), x=(m - 1) % row_len + 1)


def intra_layer_distance(m: int, m_tilde: int, spacing: float, row_len: int) -> float:
    a = atom_index(m, row_len)
    b = atom_index(m_tilde, row_len)
    return spacing * math.hypot(a.z - b.z, a.x - b.x)


def inter_layer_distance(
    m: int, m_tilde: int, spacing: float, row_len: int, layer_gap: float
) -> float:
    if not layer_gap > 0:
        raise ValueError(f"layer gap must be positive, got {layer_gap}")
    return math.hypot(intra_layer_distance(m, m_tilde, spacing, row_len), layer_gap)


def antenna_to_layer_distance(s: int, m: int, arch: SimArchitecture, side: str = TX) -> float:
    """Distance from antenna ``s`` to atom ``m`` of the layer facing the array.

    The antennas form a half-wavelength linear array along z whose center is
    aligned with the lattice center.
    """
    _, row_len, spacing, gap, _ = arch.side(side)
    if not 1 <= s <= arch.S:
        raise ValueError(f"antenna index {s} out of range 1..{arch.S}")
    idx = atom_index(m, row_len)
    center = (row_len + 1) / 2
    dz = (idx.z - center) * spacing - (s - (arch.S + 1) / 2) * arch.wavelength / 2
    dx = (idx.x - center) * spacing
    return math.sqrt(dz * dz + dx * dx + gap * gap)


# Vectorized forms used to build operators. Row/column i of every returned
# matrix corresponds to atom i + 1.


def lattice_indices(row_len: int):
    m = np.arange(1, row_len * row_len + 1)
    return -(-m // row_len), (m - 1) % row_len + 1


def intra_layer_distances(row_len: int, spacing: float) -> np.ndarray:
    z, x = lattice_indices(row_len)
    return spacing * np.hypot(z[:, None] - z[None, :], x[:, None] - x[None, :])


def inter_layer_distances(row_len: int, spacing: float, layer_gap: float) -> np.ndarray:
    if not layer_gap > 0:
        raise ValueError(f"layer gap must be positive, got {layer_gap}")
    return np.hypot(intra_layer_distances(row_len, spacing), layer_gap)


def antenna_to_layer_distances(arch: SimArchitecture, side: str = TX) -> np.ndarray:
    """Atoms x antennas matrix of antenna-to-layer distances."""
    _, row_len, spacing, gap, _ = arch.side(side)
    z, x = lattice_indices(row_len)
    center = (row_len + 1) / 2
    s = np.arange(1, arch.S + 1)
    dz = (z[:, None] - center) * spacing - (s[None, :] - (arch.S + 1) / 2) * arch.wavelength / 2
    dx = ((x - center) * spacing)[:, None]
    return np.sqrt(dz**2 + dx**2 + gap**2)
