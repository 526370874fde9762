"""Monte Carlo outage estimation, diversity-slope regression and the
closed-form tradeoff curves.

Trials are processed in fixed-size chunks keyed by trial index. Chunk results
are reduced in index order, so counts do not depend on the worker count.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .model import FixedRate, SystemConfig, sample_batch, target_rate
from .receiver import mutual_information_batch

CHUNK_TRIALS = 1 << 15
MAX_ATTEMPTS = 16
MAX_DISCARD_FRACTION = 1e-4
MIN_OUTAGE_EVENTS = 50
Z95 = 1.959963984540054  # standard normal 97.5% quantile


class RunInvalid(RuntimeError):
    """Too many degenerate realizations were discarded at a point."""


class InsufficientPoints(ValueError):
    """Fewer than three curve points qualify for the slope fit."""


def wilson_interval(successes, trials, z=Z95):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return min(p, max(0.0, center - half)), max(p, min(1.0, center + half))


@dataclass(frozen=True)
class OutagePoint:
    snr_db: float
    snr_linear: float
    target_rate_bits: float
    trials: int
    outages: int
    p_out: float
    ci_low: float
    ci_high: float
    discarded: int


@dataclass(frozen=True)
class OutageCurve:
    config: SystemConfig
    points: Tuple[OutagePoint, ...]

    @property
    def snr_db(self):
        return np.array([p.snr_db for p in self.points])

    @property
    def p_out(self):
        return np.array([p.p_out for p in self.points])


@dataclass(frozen=True)
class DmtEstimate:
    slope: float
    stderr: float
    points_used: int
    theoretical_d: float
    fit_range: Tuple[float, float]


def _count_chunk(task):
    config, point, start, count = task
    snr_linear = 10.0 ** (config.snr_grid_db[point] / 10.0)
    rate = target_rate(config, snr_linear)
    info, ok = mutual_information_batch(sample_batch(config, point, start, count))
    outages = int(np.count_nonzero(info[ok] <= rate))
    discarded = 0
    for offset in np.flatnonzero(~ok):
        # redraw from the trial's replacement substreams until one is usable
        for attempt in range(1, MAX_ATTEMPTS + 1):
            discarded += 1
            info, ok1 = mutual_information_batch(
                sample_batch(config, point, start + int(offset), 1, attempt)
            )
            if ok1[0]:
                outages += int(info[0] <= rate)
                break
        else:
            raise RunInvalid(f"trial {start + offset} degenerate after {MAX_ATTEMPTS} redraws")
    return outages, discarded


def _tasks(config, point):
    T = config.trials_per_point
    return [(config, point, s, min(CHUNK_TRIALS, T - s)) for s in range(0, T, CHUNK_TRIALS)]


def _run(tasks, workers):
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [_count_chunk(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_count_chunk, tasks))


def _make_point(config, point, results):
    snr_db = config.snr_grid_db[point]
    snr_linear = 10.0 ** (snr_db / 10.0)
    trials = config.trials_per_point
    outages = sum(r[0] for r in results)
    discarded = sum(r[1] for r in results)
    if discarded > MAX_DISCARD_FRACTION * trials:
        raise RunInvalid(
            f"{discarded} of {trials} trials discarded at {snr_db} dB "
            f"(limit {MAX_DISCARD_FRACTION:g})"
        )
    lo, hi = wilson_interval(outages, trials)
    return OutagePoint(
        snr_db=snr_db,
        snr_linear=snr_linear,
        target_rate_bits=float(target_rate(config, snr_linear)),
        trials=trials,
        outages=outages,
        p_out=outages / trials,
        ci_low=lo,
        ci_high=hi,
        discarded=discarded,
    )


def _check_trials(config):
    if config.trials_per_point < 1000:
        raise ValueError("outage estimation needs at least 1000 trials per point")


def estimate_outage(config, snr_db, workers=1):
    """Outage probability ``Pr(I_mmse <= R)`` at one grid SNR."""
    _check_trials(config)
    point = config.point_index(snr_db)
    return _make_point(config, point, _run(_tasks(config, point), workers))


def sweep_curve(config, workers=None):
    """Outage estimates at every grid SNR.

    ``workers`` defaults to the CPU count; the result is identical for any
    value.
    """
    _check_trials(config)
    n_points = len(config.snr_grid_db)
    per_point = [_tasks(config, i) for i in range(n_points)]
    flat = [t for tasks in per_point for t in tasks]
    results = _run(flat, workers)
    points, pos = [], 0
    for i, tasks in enumerate(per_point):
        points.append(_make_point(config, i, results[pos : pos + len(tasks)]))
        pos += len(tasks)
    return OutageCurve(config=config, points=tuple(points))


def theoretical_diversity(config):
    """Tradeoff-law diversity for the configured rate mode and interference."""
    r = 0.0 if isinstance(config.rate, FixedRate) else config.rate.gain
    xi = config.reference_xi if config.num_interferers else 0.0
    return dmt_theoretical(config.M, config.N, r, xi)


def estimate_slope(curve, window=None, min_events=MIN_OUTAGE_EVENTS):
    """Empirical diversity order from the log-log outage curve.

    Weighted least squares of ``log10 p_out`` on ``log10 SNR`` over points
    with ``p_min <= p_out <= p_max`` and at least ``min_events`` outages.
    Weights are inverse squared Wilson half-widths in the log domain; the
    standard error is scaled by the weighted residual variance.
    """
    p_min, p_max = window if window is not None else curve.config.fit_window
    used = [
        p for p in curve.points
        if p_min <= p.p_out <= p_max and p.outages >= min_events
    ]
    if len(used) < 3:
        raise InsufficientPoints(
            f"{len(used)} points with p_out in [{p_min:g}, {p_max:g}] "
            f"and >= {min_events} outages; need 3"
        )
    x = np.log10([p.snr_linear for p in used])
    y = np.log10([p.p_out for p in used])
    half = 0.5 * (np.log10([p.ci_high for p in used]) - np.log10([p.ci_low for p in used]))
    w = 1.0 / half**2
    X = np.column_stack([np.ones_like(x), x])
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ y)
    resid = y - X @ beta
    scale = float(np.sum(w * resid**2)) / (len(used) - 2)
    return DmtEstimate(
        slope=float(-beta[1]),
        stderr=float(math.sqrt(scale * cov[1, 1])),
        points_used=len(used),
        theoretical_d=theoretical_diversity(curve.config),
        fit_range=(float(p_min), float(p_max)),
    )


def tail_exponent(samples, quantile=0.01, n_ranks=40, min_rank=20):
    """Power-law exponent of the empirical CDF near zero.

    Regresses ``log F(x)`` on ``log x`` at log-spaced order statistics inside
    the lowest ``quantile`` of the sample.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    top = int(n * quantile)
    if top <= min_rank:
        raise InsufficientPoints("too few samples in the tail window")
    ranks = np.unique(np.geomspace(min_rank, top, n_ranks).astype(int))
    lx = np.log(x[ranks - 1])
    lf = np.log(ranks / n)
    slope, _ = np.polyfit(lx, lf, 1)
    return float(slope)


def _check_dims(M, N, r):
    if not 1 <= M <= N:
        raise ValueError("need N >= M >= 1")
    if r < 0:
        raise ValueError("multiplexing gain must be >= 0")


def dmt_theoretical(M, N, r, xi):
    """Diversity ``(N - M + 1) (1 - xi - r/M)^+`` of the interference-limited link."""
    _check_dims(M, N, r)
    if not 0.0 <= xi < 1.0:
        raise ValueError("xi must lie in [0, 1)")
    return (N - M + 1) * max(0.0, 1.0 - xi - r / M)


def dmt_p2p(M, N, r):
    """Point-to-point MMSE tradeoff ``(N - M + 1) (1 - r/M)^+``."""
    _check_dims(M, N, r)
    return (N - M + 1) * max(0.0, 1.0 - r / M)


def dmt_decomposition_check(M, N, r, xi):
    """The three equal forms of the interference-limited tradeoff.

    Returns ``(d(r, xi), d_p2p(r) - (N-M+1) xi, d_p2p(r + M xi))``.
    """
    if r + M * xi > M:
        raise ValueError("need r + M*xi <= M")
    return (
        dmt_theoretical(M, N, r, xi),
        dmt_p2p(M, N, r) - (N - M + 1) * xi,
        dmt_p2p(M, N, r + M * xi),
    )


def ml_dmt_reference(M, N, r):
    """Maximum-likelihood tradeoff ``(M - r)(N - r)`` at integer ``r``."""
    if int(r) != r or not 0 <= r <= min(M, N):
        raise ValueError("r must be an integer in [0, min(M, N)]")
    return (M - r) * (N - r)
