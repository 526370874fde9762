import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from statsmodels.stats.proportion import proportion_confint

from dmtsim import (
    FixedRate,
    InsufficientPoints,
    OutageCurve,
    OutagePoint,
    RunInvalid,
    ScalingRate,
    SystemConfig,
    dmt_decomposition_check,
    dmt_p2p,
    dmt_theoretical,
    estimate_outage,
    estimate_slope,
    ml_dmt_reference,
    sweep_curve,
    wilson_interval,
)
from dmtsim import analysis
from dmtsim.analysis import tail_exponent


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 10**7), frac=st.floats(0, 1))
def test_wilson_matches_reference(n, frac):
    k = int(round(frac * n))
    lo, hi = wilson_interval(k, n)
    ref_lo, ref_hi = proportion_confint(k, n, alpha=0.05, method="wilson")
    assert lo == pytest.approx(ref_lo, abs=1e-12)
    assert hi == pytest.approx(ref_hi, abs=1e-12)
    assert lo <= k / n <= hi


def test_dmt_closed_forms():
    assert dmt_theoretical(2, 4, 0, 0.5) == 1.5
    assert dmt_theoretical(2, 4, 1, 0) == 1.5
    assert dmt_theoretical(2, 4, 1.2, 0.5) == 0.0
    assert dmt_theoretical(3, 5, 3 * 0.6, 0.4) == 0.0
    assert dmt_p2p(2, 4, 0) == 3
    assert dmt_p2p(3, 3, 3) == 0
    assert dmt_p2p(1, 1, 0) == 1
    assert ml_dmt_reference(2, 4, 0) == 8
    assert ml_dmt_reference(2, 4, 2) == 0
    assert ml_dmt_reference(1, 1, 0) == 1


@pytest.mark.parametrize("call", [
    lambda: dmt_theoretical(3, 2, 0, 0),
    lambda: dmt_theoretical(2, 4, -1, 0),
    lambda: dmt_theoretical(2, 4, 0, 1.0),
    lambda: ml_dmt_reference(2, 4, 0.5),
    lambda: ml_dmt_reference(2, 4, 3),
    lambda: dmt_decomposition_check(2, 4, 1.5, 0.5),
])
def test_closed_form_preconditions(call):
    with pytest.raises(ValueError):
        call()


def test_decomposition_examples():
    a, b, c = dmt_decomposition_check(2, 4, 0.4, 0.3)
    assert a == pytest.approx(1.5) and b == pytest.approx(1.5) and c == pytest.approx(1.5)
    assert dmt_decomposition_check(2, 4, 0.7, 0.0) == (dmt_p2p(2, 4, 0.7),) * 3


def test_decomposition_grid():
    for r in np.linspace(0, 2, 10):
        for xi in np.linspace(0, 0.99, 10):
            if r + 2 * xi <= 2:
                a, b, c = dmt_decomposition_check(2, 4, r, xi)
                # direct evaluation of the three expressions
                assert abs(a - 3 * (1 - xi - r / 2)) <= 1e-12
                assert abs(a - b) <= 1e-12 and abs(a - c) <= 1e-12


def _synthetic_curve(p_values, slope, trials=10**7):
    pts = []
    for p in p_values:
        snr = p ** (-1.0 / slope) if slope else 10.0 ** (len(pts) + 1)
        k = int(round(p * trials))
        lo, hi = wilson_interval(k, trials)
        pts.append(OutagePoint(10 * np.log10(snr), snr, 5.0, trials, k, k / trials, lo, hi, 0))
    cfg = SystemConfig(M=2, N=4, num_interferers=1, xi=0.5, rate=FixedRate(5))
    return OutageCurve(cfg, tuple(pts))


def test_slope_exact_power_law():
    est = estimate_slope(_synthetic_curve([1e-1, 1e-2, 1e-3, 1e-4], 1.5))
    assert est.slope == pytest.approx(1.5, abs=1e-10)
    assert est.stderr < 1e-8
    assert est.points_used == 4
    assert est.theoretical_d == 1.5
    assert est.fit_range == (1e-4, 1e-1)


def test_slope_constant_outage():
    est = estimate_slope(_synthetic_curve([0.01] * 4, 0.0))
    assert est.slope == pytest.approx(0.0, abs=1e-10)


def test_slope_window_and_event_filters():
    curve = _synthetic_curve([0.5, 1e-2, 1e-3, 1e-5], 2.0)
    with pytest.raises(InsufficientPoints):
        estimate_slope(curve)
    assert estimate_slope(curve, window=(1e-6, 1.0)).points_used == 4
    # 1e-5 * 10^7 = 100 events; a 200-event floor drops it
    with pytest.raises(InsufficientPoints):
        estimate_slope(curve, window=(1e-6, 0.1), min_events=200)


def test_tail_exponent_synthetic():
    u = np.random.default_rng(1).random(10**6)
    assert tail_exponent(u ** (1 / 3)) == pytest.approx(3.0, abs=0.05)
    assert tail_exponent(u) == pytest.approx(1.0, abs=0.05)


def scalar_config(grid, trials=20_000, R=2.0, seed=0):
    return SystemConfig(M=1, N=1, snr_grid_db=grid, rate=FixedRate(R), trials_per_point=trials, seed=seed)


def test_scalar_outage_oracle():
    for snr_db in (5.0, 15.0):
        pt = estimate_outage(scalar_config((snr_db,)), snr_db)
        exact = 1 - np.exp(-(2**2 - 1) / 10 ** (snr_db / 10))
        assert pt.ci_low <= exact <= pt.ci_high
        assert pt.p_out == pt.outages / pt.trials
        assert pt.discarded == 0


def test_zero_rate_never_outage():
    cfg = SystemConfig(M=2, N=2, snr_grid_db=(10.0,), rate=ScalingRate(0.0), trials_per_point=5000)
    pt = estimate_outage(cfg, 10.0)
    assert pt.target_rate_bits == 0 and pt.outages == 0 and pt.p_out == 0


def test_too_few_trials_rejected():
    with pytest.raises(ValueError):
        estimate_outage(scalar_config((5.0,), trials=999), 5.0)


def test_more_interferers_more_outage():
    p = {}
    for k in (1, 3, 6):
        cfg = SystemConfig(M=2, N=4, num_interferers=k, xi=0.5, snr_grid_db=(25.0,),
                           rate=FixedRate(5), trials_per_point=20_000)
        p[k] = estimate_outage(cfg, 25.0)
    assert p[1].ci_high < p[3].ci_low
    assert p[3].ci_high < p[6].ci_low


def test_sweep_single_point():
    curve = sweep_curve(scalar_config((10.0,)), workers=1)
    assert len(curve.points) == 1


def test_sweep_monotone_and_worker_independent():
    cfg = scalar_config((0.0, 5.0, 10.0, 15.0), trials=3 * analysis.CHUNK_TRIALS + 11)
    one = sweep_curve(cfg, workers=1)
    many = sweep_curve(cfg, workers=3)
    assert one == many
    for a, b in zip(one.points, one.points[1:]):
        assert b.p_out <= a.p_out or b.ci_low <= a.ci_high


def _fail_first(pattern):
    real = analysis.mutual_information_batch

    def fake(batch):
        info, ok = real(batch)
        if batch.H.shape[0] > 1:
            ok = ok & ~pattern(np.arange(batch.H.shape[0]))
        return info, ok
    return fake


def test_discarded_trials_are_redrawn(monkeypatch):
    monkeypatch.setattr(analysis, "mutual_information_batch", _fail_first(lambda i: i == 3))
    monkeypatch.setattr(analysis, "MAX_DISCARD_FRACTION", 1.0)
    cfg = scalar_config((10.0,), trials=20_000)
    pt = estimate_outage(cfg, 10.0)
    assert pt.discarded == 1 and pt.trials == 20_000


def test_run_invalid_on_excess_discards(monkeypatch):
    monkeypatch.setattr(analysis, "mutual_information_batch", _fail_first(lambda i: i % 100 == 0))
    with pytest.raises(RunInvalid):
        estimate_outage(scalar_config((10.0,), trials=20_000), 10.0)
