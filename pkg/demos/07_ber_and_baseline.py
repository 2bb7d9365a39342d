"""
Bit errors and a conventional MIMO reference
============================================

Four BPSK streams share the fitted link. Leakage that the stack cannot
remove acts as noise, so a poorly fitted single-layer stack hits an error
floor while a deeper stack keeps improving with power. A fully digital
MIMO array with the same stream count serves as a reference.
"""

# %%
from dataclasses import replace

from simhmimo import harness
from simhmimo.config import load

cfg = replace(load("configs/ber_desk.toml"), trials=3)
table = {}
for layers in (1, 4):
    deeper = replace(cfg, arch=replace(cfg.arch, L=layers, K=layers))
    for r in harness.run_ber(deeper):
        if r["trial"] == "mean":
            table.setdefault(r["tx_power_dbm"], {})[layers] = r["ber"]

print(f"{'P_t (dBm)':>9} {'L=K=1':>8} {'L=K=4':>8}")
for p, row in table.items():
    print(f"{p:9.0f} {row[1]:8.4f} {row[4]:8.4f}")

# %%
# Digital MIMO with growing antenna counts, path loss and shadowing included.
base = load("configs/baseline_desk.toml")
for r in harness.run_baseline(replace(base, trials=50)):
    print(f"{r['antennas']:>3} antennas: {r['mean_capacity']:.2f} bit/s/Hz")
