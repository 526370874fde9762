# %% [markdown]
# # Small-eigenvalue tail of the gram matrix
#
# Without interference the smallest eigenvalue of H^H H has CDF ~ x^(N-M+1)
# near zero; this exponent is what sets the diversity order.

# %%
import numpy as np

from dmtsim.analysis import tail_exponent
from dmtsim.numerics import sample_cn01_streams

for M, N in ((1, 1), (2, 2), (2, 4), (3, 4)):
    H = sample_cn01_streams(seed=1, point=0, start=0, count=400_000, rows=N, cols=M)
    lam = np.linalg.eigvalsh(np.swapaxes(H, -1, -2).conj() @ H)[:, 0]
    print(f"M={M} N={N}: exponent {tail_exponent(lam):.2f}, expected {N - M + 1}")
