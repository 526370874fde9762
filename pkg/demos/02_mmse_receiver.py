# %% [markdown]
# # One realization through the MMSE receiver
#
# Per-stream SINRs, mutual information, and the bounds that bracket it.

# %%
from dmtsim import FixedRate, SystemConfig, evaluate, mmse_filter, sample_realization

config = SystemConfig(M=2, N=4, num_interferers=3, xi=0.5, snr_grid_db=(20.0,),
                      rate=FixedRate(5.0), trials_per_point=10)
real = sample_realization(config, 20.0, trial=0)
print("SNR", real.snr_linear, "INR", real.inr_linear)
print("G shape", mmse_filter(real).shape)

# %%
ev = evaluate(real)
print("SINR per stream     ", ev.sinr)
print("I_mmse (bits)       ", ev.mutual_info_bits)
print("Jensen lower / upper", ev.jensen_lower_bits, ev.jensen_upper_bits)
print("log det bound       ", ev.logdet_upper_bits)
print("smallest eigenvalue ", ev.lambda_min)
