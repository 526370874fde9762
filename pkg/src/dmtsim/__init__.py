"""Monte Carlo simulation of the diversity-multiplexing-interference tradeoff
for the uplink of interference-limited cellular MIMO with a linear MMSE
receiver."""

__version__ = "0.1.0"

from .numerics import (
    ConvergenceFailure,
    NotPositiveDefinite,
    RngStream,
    hermitian_eigenvalues,
    hermitian_inverse,
    sample_cn01,
)
from .model import (
    ChannelRealization,
    FixedRate,
    ScalingRate,
    SystemConfig,
    ValidationError,
    inr_from_snr,
    sample_realization,
    target_rate,
)
from .receiver import (
    MmseEvaluation,
    evaluate,
    jensen_lower,
    jensen_upper,
    lambda_min,
    mmse_filter,
    mutual_information,
    sinr_per_stream,
    whitened_gram,
)
from .analysis import (
    DmtEstimate,
    InsufficientPoints,
    OutageCurve,
    OutagePoint,
    RunInvalid,
    dmt_decomposition_check,
    dmt_p2p,
    dmt_theoretical,
    estimate_outage,
    estimate_slope,
    ml_dmt_reference,
    sweep_curve,
    wilson_interval,
)
