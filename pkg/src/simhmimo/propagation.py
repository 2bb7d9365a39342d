"""Diffraction operators between SIM layers and the wave-domain precoder/combiner.

The TX-SIM realizes ``P = Phi^L W^L ... Phi^2 W^2 Phi^1 W^1`` (M x S) and the
RX-SIM realizes ``Q = U^1 Psi^1 U^2 Psi^2 ... U^K Psi^K`` (S x N), where the
``W``/``U`` matrices are fixed Rayleigh-Sommerfeld coefficients and the
``Phi``/``Psi`` matrices are diagonal unit-modulus phase screens.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .geometry import (
    RX,
    TX,
    SimArchitecture,
    antenna_to_layer_distances,
    inter_layer_distances,
)

TWO_PI = 2 * np.pi


def diffraction_coefficient(dist, axial_gap, area, wavelength):
    """Rayleigh-Sommerfeld transmission coefficient between two points.

    ``cos(chi)`` is taken as ``axial_gap / dist``, the angle between the ray
    and the layer normal. Accepts scalars or arrays.
    """
    dist = np.asarray(dist, dtype=float)
    axial_gap = np.asarray(axial_gap, dtype=float)
    if np.any(axial_gap <= 0) or area <= 0 or wavelength <= 0:
        raise ValueError("axial gap, area and wavelength must be positive")
    if np.any(dist < axial_gap * (1 - 1e-12)):
        raise ValueError("distance shorter than the axial gap")
    cos_chi = axial_gap / dist
    value = (
        area
        * cos_chi
        / dist
        * (1 / (2 * np.pi * dist) - 1j / wavelength)
        * np.exp(1j * TWO_PI * dist / wavelength)
    )
    return value[()] if value.ndim == 0 else value


@dataclass(frozen=True)
class PropagationOperators:
    """Fixed TX and RX propagation matrices of one architecture.

    ``W[0]`` is W^1 (M x S) and ``W[l-1]`` is W^l (M x M) for l >= 2.
    ``U[0]`` is U^1 (S x N) and ``U[k-1]`` is U^k (N x N) for k >= 2.
    """

    W: Tuple[np.ndarray, ...]
    U: Tuple[np.ndarray, ...]

    @property
    def L(self) -> int:
        return len(self.W)

    @property
    def K(self) -> int:
        return len(self.U)

    @property
    def S(self) -> int:
        return self.W[0].shape[1]

    @property
    def M(self) -> int:
        return self.W[0].shape[0]

    @property
    def N(self) -> int:
        return self.U[0].shape[1]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _build_side(arch: SimArchitecture, side: str, layers: int):
    _, row_len, spacing, gap, area = arch.side(side)
    first = diffraction_coefficient(antenna_to_layer_distances(arch, side), gap, area, arch.wavelength)
    mats = [_frozen(first)]
    if layers > 1:
        between = _frozen(
            diffraction_coefficient(inter_layer_distances(row_len, spacing, gap), gap, area, arch.wavelength)
        )
        # all inter-layer gaps are equal, so every layer shares one matrix
        mats.extend([between] * (layers - 1))
    return mats


def build_tx_operators(arch: SimArchitecture) -> Tuple[np.ndarray, ...]:
    return tuple(_build_side(arch, TX, arch.L))


def build_rx_operators(arch: SimArchitecture) -> Tuple[np.ndarray, ...]:
    # U^1 maps the last RX layer onto the antennas: S x N
    mats = _build_side(arch, RX, arch.K)
    mats[0] = _frozen(np.ascontiguousarray(mats[0].T))
    return tuple(mats)


def build_operators(arch: SimArchitecture) -> PropagationOperators:
    return PropagationOperators(W=build_tx_operators(arch), U=build_rx_operators(arch))


@dataclass
class PhaseState:
    """Phase shifts of every meta-atom plus the complex scaling factor.

    ``theta[l-1, m-1]`` is the phase of atom m on TX layer l and
    ``xi[k-1, n-1]`` that of atom n on RX layer k. Phases are kept reduced
    to [0, 2*pi).
    """

    theta: np.ndarray
    xi: np.ndarray
    alpha: complex = 1.0 + 0.0j

    def __post_init__(self):
        self.theta = np.mod(np.asarray(self.theta, dtype=float), TWO_PI)
        self.xi = np.mod(np.asarray(self.xi, dtype=float), TWO_PI)
        self.alpha = complex(self.alpha)
        if self.theta.ndim != 2 or self.xi.ndim != 2:
            raise ValueError("theta and xi must be 2-D (layers x atoms)")

    @classmethod
    def zeros(cls, ops: PropagationOperators, alpha: complex = 1.0):
        return cls(np.zeros((ops.L, ops.M)), np.zeros((ops.K, ops.N)), alpha)

    @classmethod
    def random(cls, ops: PropagationOperators, rng: np.random.Generator, alpha: complex = 1.0):
        theta = rng.uniform(0, TWO_PI, size=(ops.L, ops.M))
        xi = rng.uniform(0, TWO_PI, size=(ops.K, ops.N))
        return cls(theta, xi, alpha)

    @property
    def phi(self) -> np.ndarray:
        return np.exp(1j * self.theta)

    @property
    def psi(self) -> np.ndarray:
        return np.exp(1j * self.xi)

    def copy(self) -> "PhaseState":
        return PhaseState(self.theta.copy(), self.xi.copy(), self.alpha)


def _check_phases(ops: PropagationOperators, phases: PhaseState):
    if phases.theta.shape != (ops.L, ops.M):
        raise ValueError(f"theta shape {phases.theta.shape} != {(ops.L, ops.M)}")
    if phases.xi.shape != (ops.K, ops.N):
        raise ValueError(f"xi shape {phases.xi.shape} != {(ops.K, ops.N)}")


def tx_response(ops: PropagationOperators, phases: PhaseState) -> np.ndarray:
    """Precoder P (M x S), accumulated from the antennas outward."""
    _check_phases(ops, phases)
    phi = phases.phi
    P = phi[0][:, None] * ops.W[0]
    for l in range(1, ops.L):
        P = phi[l][:, None] * (ops.W[l] @ P)
    return P


def rx_response(ops: PropagationOperators, phases: PhaseState) -> np.ndarray:
    """Combiner Q (S x N), accumulated from the antennas outward."""
    _check_phases(ops, phases)
    psi = phases.psi
    Q = ops.U[0] * psi[0][None, :]
    for k in range(1, ops.K):
        Q = (Q @ ops.U[k]) * psi[k][None, :]
    return Q


def end_to_end(ops: PropagationOperators, phases: PhaseState, G: np.ndarray) -> np.ndarray:
    """End-to-end S x S channel ``Q G P`` (without the scaling factor)."""
    if G.shape != (ops.N, ops.M):
        raise ValueError(f"G shape {G.shape} != {(ops.N, ops.M)}")
    return rx_response(ops, phases) @ (G @ tx_response(ops, phases))
