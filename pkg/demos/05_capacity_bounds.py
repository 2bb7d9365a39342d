"""
Capacity bounds and the many-stream limit
=========================================

Splitting power equally over ``S`` streams and replacing every stream gain by
the mean of the strongest (or weakest) eigenvalue brackets the ergodic
capacity. With a single stream the two bounds meet; as ``S`` grows both
saturate at a finite limit.
"""

# %%

from simhmimo import harness
from simhmimo.config import load
from simhmimo.metrics import LinkBudget, capacity_bounds, many_stream_limit

rows = harness.run_bounds(load("configs/bounds_desk.toml"))
for r in rows:
    print(f"S={r['streams']}: {r['bound_lower']:.3f} <= {r['mean_ideal_capacity']:.3f} <= {r['bound_upper']:.3f}")

# %%
# Saturation: with a fixed mean eigenvalue the bound approaches
# P log2(e) E(lambda^2) / sigma2 as the stream count grows.
budget = LinkBudget(1.0, 1.0)
for S in (1, 4, 16, 64, 256):
    b = capacity_bounds([(0.5, 0.5)], S, budget)
    print(f"S={S:>3}: {b.upper:.4f}  (limit {many_stream_limit(0.5, budget):.4f})")
