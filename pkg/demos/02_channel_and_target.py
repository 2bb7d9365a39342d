"""
Correlated channel and the digital target
=========================================

Between the two outermost metasurfaces the signal crosses a spatially
correlated Rayleigh channel. The best the stacks could do is to reproduce
the channel's truncated SVD, which turns the link into ``S`` parallel
streams with gains equal to the leading singular values.
"""

# %%
import numpy as np

from simhmimo import SimArchitecture, ideal_capacity, truncated_svd_target, water_filling
from simhmimo.channel import ChannelModel, PathLossParams, draw_channel
from simhmimo.metrics import LinkBudget

wl = 0.0107
arch = SimArchitecture(S=4, L=1, K=1, M=36, N=36, r_et=wl / 4, t_er=wl / 4)
model = ChannelModel.for_architecture(arch, PathLossParams(d=250.0, delta_db=0.0))
print(f"path gain at 250 m: {10 * np.log10(model.rho2):.1f} dB")
print("correlation between neighboring atoms:", round(model.R_tx[0, 1], 3))

# %%
# Quarter-wavelength spacing concentrates the channel energy in a few
# eigen-directions.
rng = np.random.default_rng(1)
G = draw_channel(model, rng).G
target = truncated_svd_target(G, arch.S)
share = target.singular_values**2 / np.sum(target.singular_values**2)
print("energy share of the first four eigenmodes:", np.round(share[:4], 3))

# %%
# Water-filling splits 20 dBm over the four streams; weak streams may get
# nothing at all.
budget = LinkBudget.from_dbm(20.0, -110.0)
alloc = water_filling(target.lambda_sq, budget.P_t, budget.sigma2)
print("power per stream (mW):", np.round(1e3 * alloc.p, 2))
print(f"ideal capacity: {ideal_capacity(target.lambda_sq, alloc, budget.sigma2):.2f} bit/s/Hz")
