"""Acceptance criteria, one test per criterion, each at its stated tolerance."""

import random
import subprocess
import sys
import time
from fractions import Fraction
from math import gcd

import numpy as np

from restricted_cf.asymptotics import (
    dyadic_grid,
    fit_exponent,
    identity_checks,
    omega_samples,
    smoothing_experiment,
)
from restricted_cf.enumeration import brute_force_complex, brute_force_real, enumerate_complex, enumerate_real
from restricted_cf.quadratic import (
    QuadElement,
    attainable_digits,
    cf_expand_complex,
    height_squared,
    in_fundamental_domain,
    nearest_lattice_point,
    reconstruct_complex,
)
from restricted_cf.realcf import cf_expand, reconstruct
from restricted_cf.spectral import (
    build_operator,
    cycle_expansion_dimension,
    dominant_eig,
    eigenvalue,
    solve_dimension,
    solve_pole,
)


def test_1_real_round_trip(report):
    rng = random.Random(20240601)
    t0 = time.perf_counter()
    failures = 0
    bad_terminal = 0
    done = 0
    while done < 10**5:
        n = rng.randint(2, 10**6)
        a = rng.randint(1, n - 1)
        if gcd(a, n) != 1:
            continue
        x = Fraction(a, n)
        digits = cf_expand(x)
        failures += reconstruct(digits) != x
        bad_terminal += digits[-1] < 2
        done += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and bad_terminal == 0 and elapsed < 10
    report("1 real round trip", ok, f"{done} fractions, {failures} failures, {elapsed:.2f}s")
    assert ok


def test_2_real_oracle(report):
    t0 = time.perf_counter()
    same = {A: enumerate_real(A, 2000).same_as(brute_force_real(A, 2000)) for A in (2, 3, 4, 5)}
    elapsed = time.perf_counter() - t0
    ok = all(same.values()) and elapsed < 60
    report("2 real oracle equivalence", ok, f"A=2..5 N=2000 {elapsed:.1f}s")
    assert ok


def test_3_dimension(report):
    t0 = time.perf_counter()
    d32 = solve_dimension(2, m=32).delta
    d64 = solve_dimension(2, m=64).delta
    orbit = cycle_expansion_dimension(2)
    elapsed = time.perf_counter() - t0
    ok = abs(d32 - d64) < 5e-11 * d32 and abs(d32 - orbit) < 5e-7 * d32 and 0.531 < d32 < 0.532 and elapsed < 5
    report("3 dimension", ok, f"delta2={d32!r} m64={d64!r} orbits={orbit!r} {elapsed:.2f}s")
    assert ok


def test_4_operator_identity(report):
    t0 = time.perf_counter()
    checks = identity_checks(2, (0.7, 0.8), (0.0, 0.1), 10, 32) + identity_checks(3, (0.7, 0.8), (0.0, 0.1), 10, 32)
    elapsed = time.perf_counter() - t0
    worst = max(abs(c.measured - c.predicted) for c in checks)
    ok = all(c.passed for c in checks) and elapsed < 10
    report("4 operator identity", ok, f"max error {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_5_counting_exponent(report, big_table_2, delta_2):
    fit = fit_exponent(omega_samples(big_table_2, dyadic_grid(12, 20)))
    ok = abs(fit.slope - 2 * delta_2) <= 0.03
    report("5 counting exponent", ok, f"slope={fit.slope:.4f} 2*delta2={2 * delta_2:.4f}")
    assert ok


def test_6_smoothing(report, big_table_2, delta_2):
    rep = smoothing_experiment(2, 0.5, dyadic_grid(12, 20), delta=delta_2, table=big_table_2)
    ok = (
        abs(rep.fit.slope - (2 * delta_2 - 0.25)) <= 0.05
        and abs(rep.window_fit.slope - 0.75) <= 0.02
        and rep.inclusion_ok
    )
    report(
        "6 smoothing",
        ok,
        f"slope={rep.fit.slope:.4f} predicted={rep.predicted:.4f} window={rep.window_fit.slope:.5f}",
    )
    assert ok


def _random_field_rational(rng, d):
    while True:
        u, v = rng.randint(-100, 100), rng.randint(-100, 100)
        n = rng.randint(1, 100)
        z = QuadElement(d, Fraction(u, n), Fraction(v, n))
        z = z - nearest_lattice_point(z)
        if height_squared(z) <= 10**4:
            return z


def test_7_complex(report):
    rng = random.Random(7)
    t0 = time.perf_counter()
    failures = 0
    for d in (1, 3):
        for _ in range(10**4):
            z = _random_field_rational(rng, d)
            assert in_fundamental_domain(z)
            digits = cf_expand_complex(z)
            failures += (reconstruct_complex(digits) != z) if digits else bool(z)
    alphabet = attainable_digits(1, 8)
    same = enumerate_complex(1, alphabet, 100).same_as(brute_force_complex(alphabet, 1, 100))
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and same and elapsed < 60
    report("7 complex round trip and oracle", ok, f"{failures} failures, oracle equal={same}, {elapsed:.1f}s")
    assert ok


def test_8_spectral_sanity(report):
    counting = all(abs(eigenvalue(A, 0.0, 0.0) - A) < 1e-12 for A in (2, 3, 4, 5))
    sigmas = np.linspace(0.1, 1.5, 15)
    logs = np.log([eigenvalue(2, s) for s in sigmas])
    shape = bool(np.all(np.diff(logs) < 0) and np.all(np.diff(logs, 2) > -1e-12))
    positive = all(bool(np.all(dominant_eig(build_operator(2, s)).eigenvector > 0)) for s in sigmas)
    delta = solve_dimension(2).delta
    pole = abs(solve_pole(2, 0.0) - delta) < 1e-10
    ok = counting and shape and positive and pole
    report("8 spectral sanity", ok, f"counting={counting} shape={shape} positive={positive} s0(0)=delta {pole}")
    assert ok


def test_9_property_suite(report):
    suite = ["test_realcf.py", "test_quadratic.py", "test_enumeration.py", "test_spectral.py", "test_asymptotics.py"]
    here = __file__.rsplit("/", 1)[0]
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *[f"{here}/{f}" for f in suite]],
        capture_output=True,
        text=True,
    )
    seq = enumerate_real(3, 5000, workers=1)
    par = enumerate_real(3, 5000, workers=2)
    parallel_ok = seq.same_as(par) and np.array_equal(seq.weighted, par.weighted)
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and parallel_ok
    report("9 property suite", ok, f"{summary}; parallel equals sequential={parallel_ok}")
    assert ok
