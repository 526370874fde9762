"""Property checks run by ``dmt-sim verify``.

Each check returns a :class:`PropertyResult` with the measured worst-case
deviation next to the tolerance it was held to.
"""

from dataclasses import dataclass

import numpy as np

from .analysis import dmt_decomposition_check, tail_exponent
from .model import SystemConfig, sample_batch
from .numerics import sample_cn01_streams
from .receiver import evaluate_batch, interference_covariance, mmse_filter, sinr_per_stream

DEFAULT_TOLERANCES = {
    "woodbury_tol": 1e-8,
    "routes_tol": 1e-8,
    "sandwich_tol": 1e-10,
    "decomposition_tol": 1e-12,
    "tail_tol": 0.3,
}


@dataclass(frozen=True)
class PropertyResult:
    name: str
    status: str  # "pass", "fail" or "skip"
    measured: float
    tolerance: float
    detail: str = ""

    def line(self):
        if self.status == "skip":
            return f"SKIP  {self.name}: {self.detail}"
        tag = "PASS" if self.status == "pass" else "FAIL"
        return f"{tag}  {self.name}: measured {self.measured:.3e} (tolerance {self.tolerance:.3e})"


def _result(name, measured, tol):
    return PropertyResult(name, "pass" if measured <= tol else "fail", float(measured), tol)


def direct_sinr(real):
    """Post-filter SINR of each stream from the MMSE output covariance.

    Signal is the desired stream's own gain through ``G H``; everything else
    (other streams, interferers, noise) counts as disturbance.
    """
    G = mmse_filter(real)
    M = real.M
    GH = G @ real.H
    gain = (real.snr_linear / M) * np.abs(GH) ** 2
    signal = np.diagonal(gain, axis1=-2, axis2=-1)
    cross = np.sum(gain, axis=-1) - signal
    noise = np.sum(np.abs(G) ** 2, axis=-1)
    interference = 0.0
    if real.R_stack.shape[-1]:
        GR = G @ real.R_stack
        interference = (real.inr_linear / M) * np.sum(np.abs(GR) ** 2 * real.q_diag, axis=-1)
    return signal / (cross + noise + interference)


def _realizations(config, count):
    n_points = len(config.snr_grid_db)
    per_point = -(-count // n_points)
    return [sample_batch(config, p, 0, per_point) for p in range(n_points)]


def check_woodbury(config, count=1000, tol=DEFAULT_TOLERANCES["woodbury_tol"]):
    worst = 0.0
    for real in _realizations(config, count):
        a = sinr_per_stream(real)
        b = direct_sinr(real)
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))))
    return _result("woodbury_sinr", worst, tol)


def check_routes(config, count=1000, tol=DEFAULT_TOLERANCES["routes_tol"]):
    worst = 0.0
    for real in _realizations(config, count):
        ev = evaluate_batch(real)
        a, b = ev.mutual_info_bits, ev.mutual_info_via_sinr_bits
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))))
    return _result("mutual_info_routes", worst, tol)


def check_sandwich(config, count=1000, tol=DEFAULT_TOLERANCES["sandwich_tol"]):
    worst = -np.inf
    for real in _realizations(config, count):
        ev = evaluate_batch(real)
        I = ev.mutual_info_bits
        worst = max(
            worst,
            float(np.max(ev.jensen_lower_bits - I)),
            float(np.max(I - ev.jensen_upper_bits)),
        )
    return _result("jensen_sandwich", max(worst, 0.0), tol)


def check_logdet(config, count=1000, tol=DEFAULT_TOLERANCES["sandwich_tol"]):
    worst = -np.inf
    for real in _realizations(config, count):
        ev = evaluate_batch(real)
        worst = max(worst, float(np.max(ev.mutual_info_bits - ev.logdet_upper_bits)))
    return _result("logdet_domination", max(worst, 0.0), tol)


def check_whitening(config, count=1000, tol=DEFAULT_TOLERANCES["sandwich_tol"]):
    if config.num_interferers == 0:
        return PropertyResult("interference_whitening", "skip", 0.0, tol, "no interferers")
    worst = 0.0
    for real in _realizations(config, count):
        floor = real.M / real.inr_linear
        lam = np.linalg.eigvalsh(interference_covariance(real))[..., 0]
        worst = max(worst, float(np.max((floor - lam) / floor)))
    return _result("interference_whitening", max(worst, 0.0), tol)


def check_tail(config, samples=1_000_000, tol=DEFAULT_TOLERANCES["tail_tol"]):
    M, N = config.M, config.N
    lam = np.empty(samples)
    chunk = 1 << 16
    for start in range(0, samples, chunk):
        n = min(chunk, samples - start)
        H = sample_cn01_streams(config.seed, 2**32, start, n, N, M)
        lam[start : start + n] = np.linalg.eigvalsh(np.swapaxes(H, -1, -2).conj() @ H)[:, 0]
    est = tail_exponent(lam)
    expected = N - M + 1
    res = _result("eigen_tail_exponent", abs(est - expected), tol)
    return PropertyResult(res.name, res.status, res.measured, tol, f"estimate {est:.3f}")


def check_decomposition(config, tol=DEFAULT_TOLERANCES["decomposition_tol"]):
    M, N = config.M, config.N
    worst = 0.0
    for r in np.linspace(0.0, M, 10):
        for xi in np.linspace(0.0, 0.99, 10):
            if r + M * xi > M:
                continue
            a, b, c = dmt_decomposition_check(M, N, r, xi)
            worst = max(worst, abs(a - b), abs(a - c))
    return _result("decomposition_identity", worst, tol)


def run_all(config: SystemConfig, realizations=1000, tail_samples=1_000_000, tolerances=None):
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    return [
        check_woodbury(config, realizations, tol["woodbury_tol"]),
        check_routes(config, realizations, tol["routes_tol"]),
        check_sandwich(config, realizations, tol["sandwich_tol"]),
        check_logdet(config, realizations, tol["sandwich_tol"]),
        check_whitening(config, realizations, tol["sandwich_tol"]),
        check_tail(config, tail_samples, tol["tail_tol"]),
        check_decomposition(config, tol["decomposition_tol"]),
    ]
