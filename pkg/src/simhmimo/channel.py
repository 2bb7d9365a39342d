"""Spatially correlated Rayleigh channel between the TX-SIM and RX-SIM surfaces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import SimArchitecture, intra_layer_distances

EIG_CLAMP = 1e-12
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path loss: reference distance ``d0`` and link distance ``d``
    in meters, exponent ``b``, shadowing standard deviation ``delta_db``."""

    d: float = 250.0
    d0: float = 1.0
    b: float = 3.5
    delta_db: float = 9.0

    def __post_init__(self):
        if not self.d0 > 0:
            raise ValueError("d0 must be positive")
        if self.d < self.d0:
            raise ValueError(f"path-loss model requires d >= d0 (d={self.d}, d0={self.d0})")
        if self.delta_db < 0:
            raise ValueError("shadowing std must be nonnegative")


def path_loss_db(params: PathLossParams, wavelength: float, shadowing_draw: float = 0.0) -> float:
    if params.d < params.d0:
        raise ValueError(f"path-loss model requires d >= d0 (d={params.d}, d0={params.d0})")
    reference = 20 * math.log10(4 * math.pi * params.d0 / wavelength)
    return reference + 10 * params.b * math.log10(params.d / params.d0) + params.delta_db * shadowing_draw


def path_loss_gain(params: PathLossParams, shadowing_draw: float, wavelength: float) -> float:
    """Linear power gain ``10**(-PL_dB/10)`` for one shadowing draw (std normal)."""
    return 10 ** (-path_loss_db(params, wavelength, shadowing_draw) / 10)


def correlation_matrix(row_len: int, spacing: float, wavelength: float) -> np.ndarray:
    """Isotropic-scattering correlation ``sinc(2 r / lambda)`` over a square lattice."""
    if not spacing > 0 or not wavelength > 0:
        raise ValueError("spacing and wavelength must be positive")
    # np.sinc is the normalized sinc sin(pi x)/(pi x)
    return np.sinc(2 * intra_layer_distances(row_len, spacing) / wavelength)


def psd_sqrt(R: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix.

    Eigenvalues below ``1e-12 * lambda_max`` (including small negative ones
    from round-off) are clamped to zero first.
    """
    R = np.asarray(R)
    scale = max(np.abs(R).max(), 1.0) if R.size else 1.0
    if np.abs(R - R.conj().T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("psd_sqrt requires a symmetric matrix")
    w, V = np.linalg.eigh(R)
    w = np.where(w < EIG_CLAMP * max(w.max(initial=0.0), 0.0), 0.0, w)
    X = (V * np.sqrt(w)) @ V.conj().T
    return (X + X.conj().T) / 2


@dataclass(frozen=True)
class ChannelModel:
    R_tx: np.ndarray
    R_rx: np.ndarray
    rho2: float
    pathloss: PathLossParams
    wavelength: float
    sqrt_tx: np.ndarray
    sqrt_rx: np.ndarray

    @property
    def M(self) -> int:
        return self.R_tx.shape[0]

    @property
    def N(self) -> int:
        return self.R_rx.shape[0]

    @classmethod
    def from_matrices(cls, R_tx, R_rx, pathloss: PathLossParams, wavelength: float):
        R_tx = np.asarray(R_tx, dtype=float)
        R_rx = np.asarray(R_rx, dtype=float)
        rho2 = path_loss_gain(pathloss, 0.0, wavelength)
        return cls(R_tx, R_rx, rho2, pathloss, wavelength, psd_sqrt(R_tx), psd_sqrt(R_rx))

    @classmethod
    def for_architecture(
        cls, arch: SimArchitecture, pathloss: Optional[PathLossParams] = None, correlated: bool = True
    ):
        pathloss = pathloss or PathLossParams()
        if correlated:
            R_tx = correlation_matrix(arch.m_max, arch.r_et, arch.wavelength)
            R_rx = correlation_matrix(arch.n_max, arch.t_er, arch.wavelength)
        else:
            R_tx, R_rx = np.eye(arch.M), np.eye(arch.N)
        return cls.from_matrices(R_tx, R_rx, pathloss, arch.wavelength)


@dataclass(frozen=True)
class ChannelRealization:
    G: np.ndarray
    rho2: float
    shadowing_draw: float
    seed: Optional[int] = None


def draw_channel(model: ChannelModel, rng: np.random.Generator, seed: Optional[int] = None) -> ChannelRealization:
    """Draw ``G = R_rx^{1/2} G~ R_tx^{1/2}`` with ``G~`` i.i.d. CN(0, rho2).

    One shadowing value is drawn per realization when ``delta_db > 0``.
    """
    shadow = float(rng.standard_normal()) if model.pathloss.delta_db > 0 else 0.0
    rho2 = path_loss_gain(model.pathloss, shadow, model.wavelength)
    shape = (model.N, model.M)
    G_iid = math.sqrt(rho2 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    G = model.sqrt_rx @ G_iid @ model.sqrt_tx
    return ChannelRealization(G=G, rho2=rho2, shadowing_draw=shadow, seed=seed)
