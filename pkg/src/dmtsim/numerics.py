"""Dense complex linear algebra and reproducible Gaussian sampling.

Sampling is counter-based: every (seed, point, stream, attempt) tuple maps to
a fixed, non-overlapping window of a Philox keystream, so a trial's draws do
not depend on which other trials were generated, in what order, or by how
many workers.
"""

from dataclasses import dataclass

import numpy as np
from numpy.random import Philox

SYMMETRY_TOL = 1e-10
RESIDUAL_TOL = 1e-8

_TWO_PI = 2.0 * np.pi
_UINT53_SCALE = 1.0 / 9007199254740992.0  # 2**-53


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Cholesky factorization failed; the realization is degenerate."""


class ConvergenceFailure(np.linalg.LinAlgError):
    """The Hermitian eigensolver did not converge."""


@dataclass(frozen=True)
class RngStream:
    """Addressable random substream.

    Parameters
    ----------
    seed : int
        Run seed (64-bit unsigned).
    stream_id : int
        Trial index within a point.
    point : int
        SNR grid index. Together with ``seed`` it forms the Philox key.
    attempt : int
        Replacement counter for trials discarded as degenerate.
    """

    seed: int
    stream_id: int
    point: int = 0
    attempt: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id", "point", "attempt"):
            value = getattr(self, name)
            if not 0 <= value < 2**64:
                raise ValueError(f"{name} must fit in 64 unsigned bits, got {value}")


def _blocks_per_stream(n_entries):
    # two uint64 words per complex entry, four words per Philox block
    return -(-2 * n_entries // 4)


def _cn_from_words(words):
    u = (words >> np.uint64(11)).astype(np.float64) * _UINT53_SCALE
    radius = np.sqrt(-np.log1p(-u[..., 0::2]))
    angle = _TWO_PI * u[..., 1::2]
    return radius * np.cos(angle) + 1j * (radius * np.sin(angle))


def sample_cn01_streams(seed, point, start, count, rows, cols, attempt=0):
    """Draw ``count`` consecutive substreams at once.

    Returns an array of shape ``(count, rows, cols)`` whose slice ``i`` is
    bit-identical to ``sample_cn01(RngStream(seed, start + i, point, attempt),
    rows, cols)``.
    """
    n_entries = rows * cols
    blocks = _blocks_per_stream(n_entries)
    counter = np.array([start * blocks, attempt, 0, 0], dtype=np.uint64)
    key = np.array([seed, point], dtype=np.uint64)
    words = Philox(key=key, counter=counter).random_raw(count * blocks * 4)
    words = words.reshape(count, blocks * 4)[:, : 2 * n_entries]
    return _cn_from_words(words).reshape(count, rows, cols)


def sample_cn01(rng, rows, cols):
    """I.i.d. CN(0, 1) matrix: real and imaginary parts each have variance 1/2.

    Uses the Box-Muller map on a fixed number of keystream words per entry, so
    the output is a pure function of ``rng``.
    """
    return sample_cn01_streams(
        rng.seed, rng.point, rng.stream_id, 1, rows, cols, attempt=rng.attempt
    )[0]


def _check_hermitian(a, tol):
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    asym = np.max(np.abs(a - np.swapaxes(a, -1, -2).conj()), initial=0.0)
    if asym > tol * scale:
        raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3g})")


def cholesky(a):
    """Lower Cholesky factor of a (stack of) Hermitian PD matrices."""
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None


def batched_cholesky(a):
    """Cholesky over a stack, isolating failures.

    Returns ``(L, ok)``; rows with ``ok == False`` hold the identity and must
    be discarded by the caller.
    """
    try:
        return np.linalg.cholesky(a), np.ones(a.shape[:-2], dtype=bool)
    except np.linalg.LinAlgError:
        pass
    flat = a.reshape(-1, *a.shape[-2:])
    out = np.empty_like(flat)
    ok = np.ones(flat.shape[0], dtype=bool)
    eye = np.eye(a.shape[-1], dtype=a.dtype)
    for i, m in enumerate(flat):
        try:
            out[i] = np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            out[i] = eye
            ok[i] = False
    return out.reshape(a.shape), ok.reshape(a.shape[:-2])


def hermitian_inverse(a, symmetry_tol=SYMMETRY_TOL, residual_tol=RESIDUAL_TOL):
    """Inverse of a Hermitian positive definite matrix via Cholesky.

    Raises
    ------
    NotPositiveDefinite
        If the factorization breaks down or the residual
        ``||A A^-1 - I||_F / ||I||_F`` exceeds ``residual_tol``.
    """
    a = np.asarray(a, dtype=np.complex128)
    _check_hermitian(a, symmetry_tol)
    n = a.shape[-1]
    eye = np.eye(n)
    low_inv = np.linalg.solve(cholesky(a), np.broadcast_to(eye, a.shape))
    inv = np.swapaxes(low_inv, -1, -2).conj() @ low_inv
    resid = np.linalg.norm(a @ inv - eye, axis=(-2, -1)) / np.sqrt(n)
    if np.any(resid > residual_tol):
        raise NotPositiveDefinite(f"inverse residual {np.max(resid):.3g} too large")
    return inv


def hermitian_eigenvalues(a, symmetry_tol=SYMMETRY_TOL):
    """Real eigenvalues in non-increasing order.

    Tiny negative values (above ``-symmetry_tol`` times the matrix scale) are
    rounding noise on PSD input and are clamped to zero.
    """
    a = np.asarray(a, dtype=np.complex128)
    _check_hermitian(a, symmetry_tol)
    try:
        w = np.linalg.eigvalsh(a)[..., ::-1]
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from None
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    return np.where((w < 0) & (w > -symmetry_tol * scale), 0.0, w)
