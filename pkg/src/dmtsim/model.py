"""System configuration and per-trial channel realizations.

The desired user has ``M`` transmit antennas, the base station ``N`` receive
antennas, and ``K - 1`` co-channel interferers each with ``M`` antennas. The
interference-to-noise ratio of interferer ``k`` is ``SNR ** xi_k``.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .numerics import RngStream, sample_cn01, sample_cn01_streams


class ValidationError(ValueError):
    """A configuration violates a model invariant."""


@dataclass(frozen=True)
class FixedRate:
    """Target rate held at ``bits`` per channel use for every SNR."""

    bits: float

    def __post_init__(self):
        if not self.bits > 0:
            raise ValidationError("fixed rate R must be > 0")


@dataclass(frozen=True)
class ScalingRate:
    """Target rate ``gain * log2(SNR)``, i.e. multiplexing gain ``gain``."""

    gain: float

    def __post_init__(self):
        if not self.gain >= 0:
            raise ValidationError("multiplexing gain r must be >= 0")


RateMode = Union[FixedRate, ScalingRate]


@dataclass(frozen=True)
class SystemConfig:
    M: int
    N: int
    num_interferers: int = 0
    xi: float = 0.0
    xi_k: Optional[Tuple[float, ...]] = None
    snr_grid_db: Tuple[float, ...] = (10.0,)
    rate: RateMode = field(default_factory=lambda: FixedRate(1.0))
    trials_per_point: int = 10_000
    seed: int = 0
    fit_window: Tuple[float, float] = (1e-4, 1e-1)

    def __post_init__(self):
        # normalise sequences so the config stays hashable and immutable
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        if self.xi_k is not None:
            object.__setattr__(self, "xi_k", tuple(float(x) for x in self.xi_k))
        object.__setattr__(self, "fit_window", tuple(float(p) for p in self.fit_window))
        self._validate()

    def _validate(self):
        if self.M < 1:
            raise ValidationError("M must be >= 1")
        if self.N < self.M:
            raise ValidationError("N must be ≥ M")
        if self.num_interferers < 0:
            raise ValidationError("interferers must be >= 0")
        if not 0.0 <= self.xi < 1.0:
            raise ValidationError("xi must lie in [0, 1)")
        if self.xi_k is not None:
            if len(self.xi_k) != self.num_interferers:
                raise ValidationError(
                    f"xi_k has {len(self.xi_k)} entries, expected {self.num_interferers}"
                )
            if any(not 0.0 < x < 1.0 for x in self.xi_k):
                raise ValidationError("each xi_k must lie in (0, 1)")
        elif self.num_interferers > 0 and self.xi == 0.0:
            raise ValidationError(
                "xi must be > 0 when interferers exist (use interferers = 0 for xi = 0)"
            )
        grid = np.asarray(self.snr_grid_db)
        if grid.size == 0:
            raise ValidationError("SNR grid is empty")
        if np.any(np.diff(grid) <= 0):
            raise ValidationError("SNR grid must be strictly increasing")
        if self.trials_per_point < 1:
            raise ValidationError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        p_min, p_max = self.fit_window
        if not 0.0 < p_min < p_max <= 1.0:
            raise ValidationError("fit window must satisfy 0 < p_min < p_max <= 1")

    @property
    def interferer_exponents(self):
        if self.xi_k is not None:
            return self.xi_k
        return (self.xi,) * self.num_interferers

    @property
    def reference_xi(self):
        """Exponent of the reference INR: the strongest interferer."""
        return max(self.xi_k) if self.xi_k else self.xi

    def point_index(self, snr_db):
        try:
            return self.snr_grid_db.index(float(snr_db))
        except ValueError:
            raise ValueError(f"SNR {snr_db} dB is not on the configured grid") from None

    def describe(self):
        """Flat ``key = value`` lines echoing the resolved configuration."""
        rate = (
            f"fixed R={self.rate.bits!r}"
            if isinstance(self.rate, FixedRate)
            else f"scaling r={self.rate.gain!r}"
        )
        return [
            f"M = {self.M}",
            f"N = {self.N}",
            f"interferers = {self.num_interferers}",
            f"xi = {self.xi!r}",
            f"xi_k = {list(self.interferer_exponents)!r}",
            f"snr_db = {list(self.snr_grid_db)!r}",
            f"rate = {rate}",
            f"trials = {self.trials_per_point}",
            f"seed = {self.seed}",
            f"fit_window = {list(self.fit_window)!r}",
        ]


@dataclass(frozen=True)
class ChannelRealization:
    """One quasi-static block, or a stack of blocks along a leading axis.

    ``H`` is ``(..., N, M)``, ``R_stack`` is ``(..., N, M*(K-1))`` and
    ``q_diag`` holds the diagonal of ``Q`` (length ``M*(K-1)``), shared by
    every block in a stack.
    """

    H: np.ndarray
    R_stack: np.ndarray
    q_diag: np.ndarray
    snr_linear: float
    inr_linear: float

    @property
    def M(self):
        return self.H.shape[-1]

    @property
    def N(self):
        return self.H.shape[-2]

    @property
    def Q(self):
        return np.diag(self.q_diag)


def inr_from_snr(snr_linear, xi_k):
    """Interference-to-noise ratio ``SNR ** xi_k``."""
    return snr_linear**xi_k


def target_rate(config, snr_linear):
    """Target rate in bits per channel use."""
    if isinstance(config.rate, FixedRate):
        return config.rate.bits
    return config.rate.gain * np.log2(snr_linear)


def _q_diag(config, snr_linear):
    exps = np.asarray(config.interferer_exponents, dtype=float)
    # INR_k / INR = SNR^(xi_k - xi_ref), exactly 1 for equal exponents
    ratios = snr_linear ** (exps - config.reference_xi)
    return np.repeat(ratios, config.M)


def _split(config, draws, snr_linear):
    M = config.M
    inr = inr_from_snr(snr_linear, config.reference_xi)
    return ChannelRealization(
        H=draws[..., :M],
        R_stack=draws[..., M:],
        q_diag=_q_diag(config, snr_linear),
        snr_linear=snr_linear,
        inr_linear=inr,
    )


def sample_realization(config, snr_db, trial, attempt=0):
    """Draw the realization of ``trial`` at grid point ``snr_db``.

    ``H`` and the interferer channels come from one substream laid out as the
    ``N x M*K`` matrix ``[H, H_1, ..., H_{K-1}]``.
    """
    point = config.point_index(snr_db)
    if not 0 <= trial < config.trials_per_point:
        raise ValueError(f"trial {trial} outside [0, {config.trials_per_point})")
    rng = RngStream(config.seed, trial, point, attempt)
    cols = config.M * (config.num_interferers + 1)
    draws = sample_cn01(rng, config.N, cols)
    return _split(config, draws, 10.0 ** (snr_db / 10.0))


def sample_batch(config, point, start, count, attempt=0):
    """Stacked realizations for trials ``start .. start + count - 1``.

    Block ``i`` equals ``sample_realization(config, grid[point], start + i)``.
    """
    cols = config.M * (config.num_interferers + 1)
    draws = sample_cn01_streams(config.seed, point, start, count, config.N, cols, attempt)
    snr_db = config.snr_grid_db[point]
    return _split(config, draws, 10.0 ** (snr_db / 10.0))
