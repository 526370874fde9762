# %% [markdown]
# # Plotting CLI outputs
#
# The CLI writes text only. Generate the inputs first, e.g.
#
#     dmt-sim sweep --config demos/configs/fig2.ini --set sweep.trials=100000 --out runs/k3
#     dmt-sim dmt-surface --config demos/configs/fig2.ini --out runs/surface
#
# then point this script at the output directories.

# %%
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

run = Path(sys.argv[1] if len(sys.argv) > 1 else "runs/k3")
surface = Path(sys.argv[2] if len(sys.argv) > 2 else "runs/surface")

# %%
data = pd.read_csv(run / "outage.csv", comment="#")
fig, ax = plt.subplots()
ax.semilogy(data["snr_db"], data["p_out"], "o-")
ax.fill_between(data["snr_db"], data["ci_low"], data["ci_high"], alpha=0.3)
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("outage probability")
fig.savefig(run / "outage.png", dpi=120)

# %%
tab = pd.read_csv(surface / "dmt_surface.csv", comment="#")
fig = plt.figure()
ax = fig.add_subplot(projection="3d")
ax.plot_trisurf(tab["r"], tab["xi"], tab["d_mmse"], cmap="viridis")
ax.set_xlabel("r")
ax.set_ylabel("xi")
ax.set_zlabel("d")
fig.savefig(surface / "surface.png", dpi=120)
