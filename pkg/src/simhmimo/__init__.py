"""Simulation of stacked-intelligent-metasurface (SIM) aided holographic MIMO links."""

from .channel import ChannelModel, ChannelRealization, PathLossParams, correlation_matrix, draw_channel, psd_sqrt
from .config import ConfigError, ExperimentConfig, Sweep
from .geometry import SimArchitecture, atom_index
from .metrics import LinkBudget, capacity_bounds, nmse, sim_capacity
from .optimizer import FitHyperparams, FitResult, fit
from .propagation import PhaseState, PropagationOperators, build_operators, end_to_end, rx_response, tx_response
from .target import SvdTarget, ideal_capacity, truncated_svd_target, water_filling

__version__ = "0.1.0"

__all__ = [
    "ChannelModel",
    "ChannelRealization",
    "PathLossParams",
    "correlation_matrix",
    "draw_channel",
    "psd_sqrt",
    "ConfigError",
    "ExperimentConfig",
    "Sweep",
    "SimArchitecture",
    "atom_index",
    "LinkBudget",
    "capacity_bounds",
    "nmse",
    "sim_capacity",
    "FitHyperparams",
    "FitResult",
    "fit",
    "PhaseState",
    "PropagationOperators",
    "build_operators",
    "end_to_end",
    "rx_response",
    "tx_response",
    "SvdTarget",
    "ideal_capacity",
    "truncated_svd_target",
    "water_filling",
]
