"""
More layers, better fit
=======================

Each extra layer adds another phase screen and another diffraction stage,
which gives the stack more freedom to shape the channel. A sweep over the
layer count with common random channels shows the NMSE falling steadily.
The same sweep is available from the command line::

    simhmimo sweep --config configs/layers_desk.toml --out layers.csv
"""

# %%
from simhmimo import harness
from simhmimo.config import load

cfg = load("configs/layers_desk.toml")
rows = harness.run_sweep(cfg)

# %%
print(f"{'layers':>6} {'NMSE':>8} {'SIM cap':>8} {'ideal':>8}")
for r in rows:
    if r.trial == "mean":
        print(f"{r.sweep_value:>6} {r.nmse:8.4f} {r.sim_capacity:8.2f} {r.ideal_capacity:8.2f}")
