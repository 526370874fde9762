# %% [markdown]
# # Diversity vs multiplexing vs interference
#
# The MMSE tradeoff with inter-cell interference exponent xi is
# d(r, xi) = (N - M + 1)(1 - xi - r/M)^+. Interference can be read either as a
# diversity loss of (N - M + 1) xi or as a multiplexing loss of M xi.

# %%
import numpy as np

from dmtsim import dmt_decomposition_check, dmt_p2p, dmt_theoretical, ml_dmt_reference

M, N = 2, 4
for xi in (0.0, 0.25, 0.5):
    row = [dmt_theoretical(M, N, r, xi) for r in np.linspace(0, M, 5)]
    print(f"xi={xi:4.2f}  d(r) at r=0,0.5,...,2: {np.round(row, 3)}")

# %% three equivalent forms
print(dmt_decomposition_check(M, N, r=0.4, xi=0.3))

# %% MMSE vs ML at full diversity
print("ML d(0) =", ml_dmt_reference(M, N, 0), " MMSE d(0) =", dmt_p2p(M, N, 0))

# %% [markdown]
# With N > 2M - 1 the diversity axis loses more than the multiplexing axis.

# %%
for N_ in (2, 3, 4, 6):
    print(f"N={N_}: diversity loss per unit xi {N_ - M + 1}, multiplexing loss {M}")
