"""
Fitting the phase screens
=========================

The phases of all layers are tuned by gradient descent so that the
end-to-end matrix ``alpha * Q G P`` matches the diagonal of singular values.
Each step is normalized per layer and the learning rate halves every
iteration, so the descent settles within a few dozen iterations.
"""

# %%
import numpy as np

from simhmimo import FitHyperparams, SimArchitecture, build_operators, end_to_end, fit, truncated_svd_target
from simhmimo.channel import ChannelModel, PathLossParams, draw_channel
from simhmimo.metrics import LinkBudget, sim_capacity
from simhmimo.target import ideal_capacity, water_filling

wl = 0.0107
arch = SimArchitecture(S=4, L=4, K=4, M=49, N=49, r_et=wl / 2, t_er=wl / 2)
ops = build_operators(arch)
rng = np.random.default_rng(2)
G = draw_channel(ChannelModel.for_architecture(arch, PathLossParams(delta_db=0.0)), rng).G
target = truncated_svd_target(G, arch.S)

# %%
result = fit(ops, G, target.Lambda_S, FitHyperparams(n_starts=10), rng)
print(f"winning start {result.start_index}, {result.iterations} iterations, NMSE {result.final_nmse:.4f}")
print("loss of each start:", np.round(np.array(result.start_losses) / np.sum(target.lambda_sq), 4))

# %%
# The fitted link is nearly diagonal: the off-diagonal entries are the
# leakage between streams.
H = result.phases.alpha * end_to_end(ops, result.phases, G)
print(np.round(np.abs(H) / target.singular_values[0], 3))

# %%
# Leakage costs capacity compared with the ideal digital SVD.
budget = LinkBudget.from_dbm()
alloc = water_filling(target.lambda_sq, budget.P_t, budget.sigma2)
print(f"fitted SIM: {sim_capacity(H, 1.0, alloc, budget.sigma2):.2f} bit/s/Hz")
print(f"ideal SVD:  {ideal_capacity(target.lambda_sq, alloc, budget.sigma2):.2f} bit/s/Hz")
