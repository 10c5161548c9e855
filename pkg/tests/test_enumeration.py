import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from restricted_cf.enumeration import (
    CountTable,
    ThickenedWindow,
    brute_force_complex,
    brute_force_real,
    enumerate_complex,
    enumerate_real,
    floor_power,
    sigma_count,
    table_from_csv,
    table_to_csv,
    thickened_count,
)
from restricted_cf.quadratic import attainable_digits, unit_closure, field
from restricted_cf.realcf import DomainError, cf_expand


def test_small_table():
    t = enumerate_real(2, 5)
    assert t.as_dict() == {2: 1, 3: 1, 5: 2}
    assert t.total() == 4
    assert sigma_count(t, 5) == 2
    assert sigma_count(t, 4) == 0
    assert enumerate_real(5, 5).as_dict() == {2: 1, 3: 2, 4: 2, 5: 4}
    assert enumerate_real(2, 2).as_dict() == {2: 1}


def test_rejects_degenerate_arguments():
    with pytest.raises(DomainError):
        enumerate_real(0, 10)
    with pytest.raises(DomainError):
        enumerate_real(2, 0)
    # a terminal digit must be >= 2, so A = 1 admits nothing
    assert enumerate_real(1, 50).total() == 0


def test_brute_force_with_large_alphabet_counts_all_fractions():
    t = brute_force_real(1000, 10)
    assert t.total() == sum(1 for n in range(2, 11) for a in range(1, n) if math.gcd(a, n) == 1)


@pytest.mark.parametrize("A", [2, 3, 4, 5])
def test_oracle_equivalence_small(A):
    assert enumerate_real(A, 400).same_as(brute_force_real(A, 400))


def test_members_are_distinct_and_valid():
    table, members = enumerate_real(3, 500, return_members=True)
    assert len(members) == len(set(members)) == table.total()
    for p, q in members:
        assert math.gcd(p, q) == 1 and 0 < p < q <= 500
        assert max(cf_expand(Fraction(p, q))) <= 3


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(2, 600), st.integers(2, 600))
def test_monotone_in_N_and_A(A, N1, N2):
    lo, hi = sorted((N1, N2))
    assert enumerate_real(A, lo).total() <= enumerate_real(A, hi).total()
    assert enumerate_real(A, lo).total() <= enumerate_real(A + 1, lo).total()
    # the larger table restricted to n <= lo is the smaller table
    assert enumerate_real(A, hi).total(lo) == enumerate_real(A, lo).total()


def test_parallel_equals_sequential():
    seq = enumerate_real(4, 3000, workers=1)
    par = enumerate_real(4, 3000, workers=2)
    assert seq.same_as(par)
    assert np.array_equal(seq.weighted, par.weighted)
    assert table_to_csv(seq) == table_to_csv(par)


def test_weighted_sums_at_zero_are_counts():
    t = enumerate_real(3, 300)
    assert np.allclose(t.weighted_at(0.0), t.counts)


def test_weighted_sums_match_lengths():
    t = enumerate_real(2, 100, w_grid=(0.1,))
    expect = np.zeros(101)
    for n in range(2, 101):
        for a in range(1, n):
            if math.gcd(a, n) == 1:
                digits = cf_expand(Fraction(a, n))
                if max(digits) <= 2:
                    expect[n] += math.exp(0.1 * len(digits))
    assert np.allclose(t.weighted_at(0.1), expect, rtol=1e-14)


def test_csv_round_trip():
    t = enumerate_real(3, 200)
    back = table_from_csv(table_to_csv(t))
    assert back.N == 200
    assert np.array_equal(back.counts, t.counts)
    assert np.array_equal(back.weighted, t.weighted)
    assert table_to_csv(back) == table_to_csv(t)


def test_csv_always_has_last_row():
    text = table_to_csv(enumerate_real(2, 4))
    assert text.splitlines()[-1].startswith("4,0")


def test_window():
    win = ThickenedWindow(2**16, 0.5)
    assert win.width == 2**12  # floor(N^(3/4))
    assert win.n_low == 2**16 - 2**12
    assert ThickenedWindow(5, 0.5).n_low == 2
    assert floor_power(10**6, Fraction(1, 2)) == 1000
    assert floor_power(10**6 - 1, Fraction(1, 2)) == 999
    with pytest.raises(DomainError):
        ThickenedWindow(100, 0.0)


def test_degenerate_window_is_single_denominator():
    # gamma > 2 makes the window narrower than one step
    t = enumerate_real(2, 1000)
    win = ThickenedWindow(1000, 2.5)
    assert win.width == 0
    assert thickened_count(t, win) == sigma_count(t, 1000)


@pytest.mark.parametrize("gamma", [0.3, 0.5, 1.0])
def test_inclusion_chain(gamma):
    t = enumerate_real(2, 2**12)
    for N in [2**k for k in range(3, 13)]:
        win = ThickenedWindow(N, gamma)
        assert sigma_count(t, N) <= thickened_count(t, win) <= t.total(N)


def test_thickened_needs_full_coverage():
    with pytest.raises(DomainError):
        thickened_count(enumerate_real(2, 100), ThickenedWindow(200, 0.5))


def test_count_table_merge():
    a = CountTable.empty(10, (0.0,))
    a.record(np.array([3, 5]), 2)
    b = CountTable.empty(10, (0.0,))
    b.record(np.array([5]), 3)
    m = a.merge(b)
    assert m.as_dict() == {3: 1, 5: 2}
    assert m[5][1][0.0] == pytest.approx(2.0)


# -- complex -------------------------------------------------------------------


@pytest.mark.parametrize("d", [1, 3])
def test_complex_oracle_equivalence(d):
    alphabet = attainable_digits(d, 8)
    fast, fm = enumerate_complex(d, alphabet, 60, return_members=True)
    slow, sm = brute_force_complex(alphabet, d, 60, return_members=True)
    assert fast.same_as(slow)
    assert fm == sm


@pytest.mark.parametrize("d", [2, 7, 11])
def test_complex_oracle_other_fields(d):
    alphabet = attainable_digits(d, 12)
    assert enumerate_complex(d, alphabet, 40).same_as(brute_force_complex(alphabet, d, 40))


def test_complex_singleton_alphabet():
    t = enumerate_complex(1, [(2, 0)], 1000)
    assert t.as_dict() == {4: 1, 25: 1, 144: 1, 841: 1}


def test_complex_unit_closure_example():
    F = field(1)
    alphabet = unit_closure(F, [(2, 1), (1, 3)])
    _, members = enumerate_complex(1, alphabet, 49, return_members=True)
    assert any(beta == (7, 0) and alpha == (3, -1) for alpha, beta in members)


def test_complex_parallel_equals_sequential():
    alphabet = attainable_digits(1, 8)
    assert enumerate_complex(1, alphabet, 60, workers=2).same_as(enumerate_complex(1, alphabet, 60))


def test_complex_rejects_zero_digit():
    with pytest.raises(DomainError):
        enumerate_complex(1, [(0, 0)], 10)
