import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from restricted_cf.asymptotics import (
    VerifyConfig,
    complex_exponent_fit,
    dyadic_grid,
    estimate_B,
    fit_exponent,
    omega_samples,
    run_verification,
    samples_csv,
    smoothing_experiment,
)
from restricted_cf.enumeration import enumerate_complex, enumerate_real
from restricted_cf.quadratic import attainable_digits
from restricted_cf.realcf import DomainError
from restricted_cf.spectral import solve_dimension, solve_pole


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.01, 100.0))
def test_fit_recovers_exact_power_law(alpha, c):
    fit = fit_exponent((n, c * n**alpha) for n in dyadic_grid(4, 14))
    assert fit.slope == pytest.approx(alpha, abs=1e-10)
    assert math.exp(fit.intercept) == pytest.approx(c, rel=1e-8)
    assert fit.stderr < 1e-9


def test_fit_needs_three_points():
    with pytest.raises(DomainError):
        fit_exponent([(2, 1.0), (4, 2.0), (8, 0.0)])


def test_synthetic_table_ratio_tends_to_one():
    # counts n^(2 delta - 1) * 2 delta per denominator sum to roughly N^(2 delta)
    N, delta = 2**14, 0.6
    counts = np.zeros(N + 1)
    n = np.arange(2, N + 1)
    counts[2:] = 2 * delta * n ** (2 * delta - 1.0)
    cum = np.cumsum(counts)
    ratios = [cum[k] / k ** (2 * delta) for k in dyadic_grid(6, 14)]
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)
    assert abs(ratios[-1] - 1) < 0.01


def test_omega_exponent(big_table_2, delta_2):
    fit = fit_exponent(omega_samples(big_table_2, dyadic_grid(12, 20)))
    assert abs(fit.slope - 2 * delta_2) < 0.03


@pytest.mark.parametrize("w", [-0.1, 0.0, 0.1])
def test_estimate_B_levels_off(big_table_2, w):
    s0 = solve_pole(2, w)
    top = estimate_B(big_table_2, w, s0, dyadic_grid(19, 20))
    vals = [b for _, b in top]
    assert max(vals) / min(vals) - 1 < 0.10
    with pytest.raises(DomainError):
        estimate_B(big_table_2, w, s0, [2**21])


def test_smoothing_experiment(big_table_2, delta_2):
    rep = smoothing_experiment(2, 0.5, dyadic_grid(12, 20), delta=delta_2, table=big_table_2)
    assert rep.inclusion_ok
    assert abs(rep.fit.slope - (2 * delta_2 - 0.25)) < 0.05
    assert abs(rep.window_fit.slope - 0.75) < 0.02
    rec = rep.as_record()
    assert rec["prediction"] == pytest.approx(2 * delta_2 - 0.25)
    assert len(rec["samples"]) == 9


def test_smoothing_smaller_gamma(big_table_2, delta_2):
    rep = smoothing_experiment(2, 0.3, dyadic_grid(12, 20), delta=delta_2, table=big_table_2)
    assert abs(rep.fit.slope - rep.predicted) < 0.05


def test_verification_passes_and_detects_wrong_dimension():
    checks = run_verification(VerifyConfig(A=2, N_max=2**16))
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]
    bad = run_verification(VerifyConfig(A=2, N_max=2**16, delta_override=0.6))
    assert not all(c.passed for c in bad)
    assert any(c.line().startswith("FAIL omega exponent") for c in bad)


def test_verification_identity_only():
    checks = run_verification(VerifyConfig(A=3, identity_only=True))
    assert len(checks) == 4 and all(c.passed for c in checks)


def test_complex_fit():
    alphabet = attainable_digits(1, 8)
    fit = complex_exponent_fit(1, alphabet, [16, 32, 64, 128])
    assert 1.0 < fit.slope < 2.0
    with pytest.raises(DomainError):
        complex_exponent_fit(1, (), [16, 32, 64])


def test_samples_csv():
    text = samples_csv([(2, 4.0), (4, 16.0), (8, 64.0)], 2.0)
    rows = [r.split(",") for r in text.splitlines()]
    assert rows[0] == ["N", "count", "predicted"]
    assert [float(r[2]) for r in rows[1:]] == pytest.approx([4.0, 16.0, 64.0])


def test_omega_exponent_A3():
    table = enumerate_real(3, 2**20, collect_lengths=False)
    fit = fit_exponent(omega_samples(table, dyadic_grid(12, 20)))
    assert abs(fit.slope - 2 * solve_dimension(3).delta) < 0.03


def test_smoothing_ratios_finite_positive(big_table_2, delta_2):
    rep = smoothing_experiment(2, 0.5, dyadic_grid(12, 20), delta=delta_2, table=big_table_2)
    assert all(math.isfinite(r.ratio) and r.ratio > 0 for r in rep.records)


def test_complex_slope_stable_across_octaves():
    alphabet = attainable_digits(1, 50)
    table = enumerate_complex(1, alphabet, 256, w_grid=())
    grid = [round(2 ** (k / 2)) for k in range(8, 17)]
    low = complex_exponent_fit(1, alphabet, grid[:5], table=table)
    high = complex_exponent_fit(1, alphabet, grid[4:], table=table)
    assert 0 < high.slope < 2
    assert abs(low.slope - high.slope) < 0.1
