"""Linear MMSE receiver: filter, per-stream SINR, mutual information and the
per-realization bounds used in the outage analysis.

Every function accepts a single :class:`~dmtsim.model.ChannelRealization` or a
stack of them (leading batch axis). Single realizations raise
:class:`~dmtsim.numerics.NotPositiveDefinite` on degeneracy; the ``*_batch``
entry points instead return a validity mask so the caller can discard and
redraw.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import (
    ConvergenceFailure,
    batched_cholesky,
    cholesky,
    hermitian_eigenvalues,
)


def _herm(a):
    return np.swapaxes(a, -1, -2).conj()


@dataclass(frozen=True)
class MmseEvaluation:
    """Per-realization receiver quantities (bits use log base 2).

    For stacked input every field gains a leading batch axis and ``valid``
    flags realizations whose factorizations succeeded.
    """

    sinr: np.ndarray
    mutual_info_bits: np.ndarray
    mutual_info_via_sinr_bits: np.ndarray
    jensen_lower_bits: np.ndarray
    jensen_upper_bits: np.ndarray
    logdet_upper_bits: np.ndarray
    lambda_min: np.ndarray
    valid: np.ndarray


def interference_covariance(real):
    """``R Q R^H + (M / INR) I``, the whitening matrix of the gram form.

    With no interferers this is ``(M / INR) I``.
    """
    N, M = real.N, real.M
    W = (M / real.inr_linear) * np.eye(N, dtype=np.complex128)
    if real.R_stack.shape[-1]:
        R = real.R_stack
        W = W + (R * real.q_diag) @ _herm(R)
    return W


def _gram(real, factor):
    low, ok = factor(interference_covariance(real))
    V = np.linalg.solve(low, real.H)
    C = _herm(V) @ V
    return 0.5 * (C + _herm(C)), ok


def whitened_gram(real):
    """``C = H^H (R Q R^H + (M/INR) I)^-1 H``, Hermitian PSD ``M x M``."""
    C, _ = _gram(real, lambda a: (cholesky(a), True))
    return C


def _inverse_diag(real, factor):
    """Diagonal of ``(I + (SNR/INR) C)^-1`` and ``log2 det(I + (SNR/INR) C)``."""
    C, ok_w = _gram(real, factor)
    A = np.eye(real.M) + (real.snr_linear / real.inr_linear) * C
    low, ok_a = factor(A)
    low_inv = np.linalg.solve(low, np.broadcast_to(np.eye(real.M), A.shape))
    # (L L^H)^-1 = L^-H L^-1, so diagonal entry i is the squared norm of column i
    diag = np.sum(np.abs(low_inv) ** 2, axis=-2)
    logdet = 2.0 * np.sum(np.log2(np.diagonal(low, axis1=-2, axis2=-1).real), axis=-1)
    return C, diag, logdet, ok_w & ok_a


def _strict(a):
    return cholesky(a), True


def mmse_filter(real):
    """MMSE equalizer ``G`` (``M x N``) for the received vector.

    ``G = sqrt(M/SNR) H^H (H H^H + (INR/SNR) R Q R^H + (M/SNR) I)^-1``.
    """
    snr, inr, M = real.snr_linear, real.inr_linear, real.M
    H = real.H
    S = H @ _herm(H) + (M / snr) * np.eye(real.N)
    if real.R_stack.shape[-1]:
        R = real.R_stack
        S = S + (inr / snr) * ((R * real.q_diag) @ _herm(R))
    low = cholesky(S)
    X = np.linalg.solve(_herm(low), np.linalg.solve(low, H))
    return np.sqrt(M / snr) * _herm(X)


def sinr_per_stream(real):
    """Post-MMSE SINR of each of the ``M`` streams, ``1/[(I + (SNR/INR) C)^-1]_ii - 1``."""
    _, diag, _, _ = _inverse_diag(real, _strict)
    return np.maximum(1.0 / diag - 1.0, 0.0)


def mutual_information(real):
    """Sum rate of the ``M`` MMSE pipes, ``-sum_i log2 [(I + (SNR/INR) C)^-1]_ii``."""
    _, diag, _, _ = _inverse_diag(real, _strict)
    return -np.sum(np.log2(diag), axis=-1)


def jensen_lower(real):
    """``-M log2(tr[(I + (SNR/INR) C)^-1] / M)``; never above the mutual information."""
    _, diag, _, _ = _inverse_diag(real, _strict)
    return -real.M * np.log2(np.mean(diag, axis=-1))


def jensen_upper(real):
    """``M log2(mean_i 1/[(I + (SNR/INR) C)^-1]_ii)``; never below the mutual information."""
    _, diag, _, _ = _inverse_diag(real, _strict)
    return real.M * np.log2(np.mean(1.0 / diag, axis=-1))


def lambda_min(real):
    """Smallest eigenvalue of the whitened gram matrix, clamped at zero."""
    return np.maximum(hermitian_eigenvalues(whitened_gram(real))[..., -1], 0.0)


def _assemble(real, factor):
    C, diag, logdet, ok = _inverse_diag(real, factor)
    M = real.M
    sinr = np.maximum(1.0 / diag - 1.0, 0.0)
    try:
        lam = np.maximum(np.linalg.eigvalsh(C)[..., 0], 0.0)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from None
    return MmseEvaluation(
        sinr=sinr,
        mutual_info_bits=-np.sum(np.log2(diag), axis=-1),
        mutual_info_via_sinr_bits=np.sum(np.log2(1.0 + sinr), axis=-1),
        jensen_lower_bits=-M * np.log2(np.mean(diag, axis=-1)),
        jensen_upper_bits=M * np.log2(np.mean(1.0 / diag, axis=-1)),
        logdet_upper_bits=logdet,
        lambda_min=lam,
        valid=np.asarray(ok),
    )


def evaluate(real):
    """All receiver quantities for one realization in a single pass."""
    return _assemble(real, _strict)


def evaluate_batch(real):
    """Like :func:`evaluate` on a stack; degenerate blocks get ``valid=False``."""
    return _assemble(real, batched_cholesky)


def mutual_information_batch(real):
    """Mutual information over a stack plus the validity mask (outage hot path)."""
    _, diag, _, ok = _inverse_diag(real, batched_cholesky)
    info = -np.sum(np.log2(diag), axis=-1)
    return np.where(ok, info, np.nan), ok
