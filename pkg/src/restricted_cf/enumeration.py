"""Counting bounded-digit rationals by continuant search, with brute-force oracles.

Real case: every string ``a_1..a_l`` with digits ``<= A`` and last digit ``>= 2``
is the canonical expansion of exactly one reduced ``p/q`` in (0, 1), and
``q = q_l`` is nondecreasing along the string, so the search prunes at ``q > N``.
The tree is walked depth first in numpy chunks, one subtree per first digit.

Complex case: digit strings over a finite alphabet are grown depth first from
their last digit; a string is counted only if re-expanding its value
reproduces it exactly.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .quadratic import Pair, euclid_gcd_pair, expand_pair, field
from .realcf import DomainError, cf_expand

DEFAULT_W_GRID = (-0.2, -0.1, 0.0, 0.1, 0.2)


class CountTable:
    """Per-denominator counts ``|Sigma_{n,A}|`` and length-weighted sums.

    ``counts[n]`` is the number of elements with denominator (or height squared)
    ``n``; the table covers ``0 <= n <= N``. ``lengths`` maps an expansion
    length to ``(keys, multiplicities)``, an exact sparse histogram, from which
    ``weighted[k, n] = sum of exp(w_grid[k] * length)`` is computed, always
    summing in increasing length so equal histograms give bit-identical floats.
    Tables read back from CSV carry ``weighted`` directly and no histogram.
    """

    def __init__(self, N: int, w_grid: Sequence[float] = (), counts=None, lengths=None, weighted=None):
        self.N = int(N)
        self.w_grid = tuple(float(w) for w in w_grid)
        self.counts = np.zeros(self.N + 1, dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
        if self.counts.shape != (self.N + 1,):
            raise ValueError("counts must have length N + 1")
        self.lengths = {} if weighted is None and lengths is None else lengths
        self._weighted = None if weighted is None else np.asarray(weighted, dtype=np.float64)

    @classmethod
    def empty(cls, N: int, w_grid: Sequence[float] = ()) -> "CountTable":
        return cls(N, w_grid)

    @property
    def weighted(self) -> np.ndarray:
        if self._weighted is None:
            rows = [self.weighted_at(w) for w in self.w_grid]
            self._weighted = np.stack(rows) if rows else np.zeros((0, self.N + 1))
        return self._weighted

    def weighted_at(self, w: float) -> np.ndarray:
        """``n -> sum over elements at n of exp(w * length)``."""
        if self.lengths is None:
            if w in self.w_grid:
                return self.weighted[self.w_grid.index(w)]
            raise KeyError(f"w={w} was not sampled and no length histogram is stored")
        out = np.zeros(self.N + 1)
        for length in sorted(self.lengths):
            keys, mult = self.lengths[length]
            out[keys] += mult * math.exp(w * length)
        return out

    def __getitem__(self, n: int) -> tuple[int, dict[float, float]]:
        if not 0 <= n <= self.N:
            return 0, {w: 0.0 for w in self.w_grid}
        return int(self.counts[n]), {w: float(self.weighted[k, n]) for k, w in enumerate(self.w_grid)}

    def items(self):
        for n in np.flatnonzero(self.counts):
            yield int(n), self[int(n)]

    def as_dict(self) -> dict[int, int]:
        return {int(n): int(self.counts[n]) for n in np.flatnonzero(self.counts)}

    def total(self, upto: int | None = None) -> int:
        """``|Omega_N|``: number of elements with key ``<= upto`` (default ``N``)."""
        upto = self.N if upto is None else upto
        if upto > self.N:
            raise DomainError(f"table covers n <= {self.N}, asked for {upto}")
        return int(self.counts[: upto + 1].sum())

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.counts)

    def record(self, keys, length: int) -> None:
        """Add elements with the given keys, all of the same expansion length."""
        keys = np.asarray(keys, dtype=np.int64)
        if keys.size == 0:
            return
        self.counts += np.bincount(keys, minlength=self.N + 1)
        self._add_lengths(length, *np.unique(keys, return_counts=True))

    def _add_lengths(self, length, keys, mult):
        if self.lengths is None:
            raise ValueError("table has no length histogram")
        if length in self.lengths:
            k0, m0 = self.lengths[length]
            uniq, inv = np.unique(np.concatenate([k0, keys]), return_inverse=True)
            keys = uniq
            mult = np.bincount(inv, weights=np.concatenate([m0, mult]).astype(np.float64), minlength=uniq.size)
        self.lengths[length] = (np.asarray(keys, dtype=np.int64), np.rint(mult).astype(np.int64))
        self._weighted = None

    def merge(self, other: "CountTable") -> "CountTable":
        if (self.N, self.w_grid) != (other.N, other.w_grid):
            raise ValueError("cannot merge tables with different coverage or w grids")
        out = CountTable(self.N, self.w_grid, self.counts + other.counts, dict(self.lengths))
        for length, (keys, mult) in other.lengths.items():
            out._add_lengths(length, keys, mult)
        return out

    def same_as(self, other: "CountTable") -> bool:
        return (
            self.N == other.N
            and self.w_grid == other.w_grid
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.weighted, other.weighted)
        )

    def __repr__(self):
        return f"CountTable(N={self.N}, total={self.total()}, w_grid={self.w_grid})"


# -- real case ----------------------------------------------------------------


CHUNK = 1 << 18


def _real_subtree(A: int, N: int, first: int, w_grid: tuple[float, ...], collect: bool):
    table = CountTable.empty(N, w_grid)
    members = []
    if first > N:
        return table, members
    # depth-first over chunks of at most CHUNK nodes keeps memory bounded;
    # per-length counts are dense so the visiting order does not matter
    by_length: dict[int, np.ndarray] = {}
    # state after the first digit: p = (p_prev, p_cur), q = (q_prev, q_cur)
    one = lambda v: np.array([v], dtype=np.int64)
    stack = [(1, one(0), one(1), one(1), one(first), np.array([first >= 2]))]
    while stack:
        length, pp, pc, qp, qc, terminal = stack.pop()
        leaf_q = qc[terminal]
        if leaf_q.size:
            if length not in by_length:
                by_length[length] = np.zeros(N + 1, dtype=np.int64)
            by_length[length] += np.bincount(leaf_q, minlength=N + 1)
            if collect:
                members.extend(zip(pc[terminal].tolist(), leaf_q.tolist()))
        parts = [[], [], [], [], []]
        for a in range(1, A + 1):
            nq = a * qc + qp
            keep = nq <= N
            if not keep.any():
                continue
            parts[0].append(pc[keep])
            parts[1].append(a * pc[keep] + pp[keep])
            parts[2].append(qc[keep])
            parts[3].append(nq[keep])
            parts[4].append(np.full(int(keep.sum()), a >= 2))
        if not parts[0]:
            continue
        children = [np.concatenate(p) for p in parts]
        for lo in range(0, children[0].size, CHUNK):
            stack.append((length + 1, *(c[lo : lo + CHUNK] for c in children)))
    for length in sorted(by_length):
        dense = by_length[length]
        keys = np.flatnonzero(dense)
        table.counts += dense
        table._add_lengths(length, keys, dense[keys])
    return table, members


def _check_real_args(A: int, N: int) -> None:
    if A < 1:
        raise DomainError(f"digit bound must be >= 1, got {A}")
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if N > 2**62 // (A + 1):
        raise DomainError("N too large for 64-bit continuants")


def enumerate_real(
    A: int,
    N: int,
    collect_lengths: bool = True,
    w_grid: Sequence[float] = DEFAULT_W_GRID,
    workers: int = 1,
    return_members: bool = False,
):
    """Count ``Omega_{N,A}`` by denominator, one entry per reduced fraction.

    With ``collect_lengths`` the table also carries ``sum exp(w * length)`` for
    each ``w`` in ``w_grid``. With ``return_members`` the reduced fractions
    ``(p, q)`` are returned too, as a sorted list.
    """
    _check_real_args(A, N)
    grid = tuple(float(w) for w in w_grid) if collect_lengths else ()
    args = [(A, N, a1, grid, return_members) for a1 in range(1, min(A, N) + 1)]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_real_subtree, *zip(*args)))
    else:
        results = [_real_subtree(*a) for a in args]
    table = CountTable.empty(N, grid)
    members = []
    for sub, mem in results:
        table = table.merge(sub)
        members.extend(mem)
    if return_members:
        return table, sorted(members)
    return table


def brute_force_real(A: int, N: int, w_grid: Sequence[float] = DEFAULT_W_GRID) -> CountTable:
    """Reference table: expand every reduced ``a/n`` with ``n <= N`` and filter."""
    _check_real_args(A, N)
    grid = tuple(float(w) for w in w_grid)
    counts = np.zeros(N + 1, dtype=np.int64)
    by_length: dict[tuple[int, int], int] = {}
    for n in range(2, N + 1):
        for a in range(1, n):
            if gcd(a, n) != 1:
                continue
            digits = cf_expand(Fraction(a, n))
            if max(digits) <= A:
                counts[n] += 1
                key = (len(digits), n)
                by_length[key] = by_length.get(key, 0) + 1
    table = CountTable(N, grid)
    for length, n in sorted(by_length):
        table.record(np.full(by_length[length, n], n), length)
    assert np.array_equal(table.counts, counts)
    return table


def sigma_count(table: CountTable, N: int) -> int:
    """``|Sigma_{N,A}|``; zero when ``N`` is outside the table."""
    return table[N][0]


@dataclass(frozen=True)
class ThickenedWindow:
    """Denominator window ``[N - floor(N eps), N]`` with ``eps = N**(-gamma/2)``."""

    N: int
    gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if self.N < 2:
            raise DomainError(f"N must be >= 2, got {self.N}")
        if self.width >= self.N:
            raise DomainError("window underflow: floor(N*eps) >= N")

    @property
    def epsilon(self) -> float:
        return self.N ** (-self.gamma / 2)

    @property
    def width(self) -> int:
        """``floor(N * eps) = floor(N**(1 - gamma/2))``, computed exactly."""
        return floor_power(self.N, 1 - _exact(self.gamma) / 2)

    @property
    def n_low(self) -> int:
        return self.N - self.width


def _exact(x: float | Fraction | str) -> Fraction:
    # decimal literals such as 0.3 are taken at face value, not as binary floats
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _iroot(x: int, k: int) -> int:
    """``floor(x ** (1/k))`` for integers ``x >= 0``, ``k >= 1``."""
    if x < 2 or k == 1:
        return x
    r = int(round(x ** (1.0 / k))) if x.bit_length() < 1000 else 1 << (x.bit_length() // k)
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def floor_power(N: int, e: Fraction) -> int:
    """``floor(N ** e)`` for a positive integer ``N`` and rational ``e``."""
    e = Fraction(e)
    if e < 0:
        return 1 if N == 1 else 0
    return _iroot(N**e.numerator, e.denominator)


def thickened_count(table: CountTable, window: ThickenedWindow) -> int:
    """``|Sigma_{N,A}(eps)| = sum of counts over the window``."""
    if window.N > table.N:
        raise DomainError(f"table covers n <= {table.N}, window needs up to {window.N}")
    return int(table.counts[window.n_low : window.N + 1].sum())


# -- complex case ---------------------------------------------------------------


def _complex_subtree(d, alphabet, N, last, w_grid):
    """All expansions ending in ``last`` with height squared ``<= N``.

    Strings grow by prepending digits. A proper suffix of an expansion is the
    expansion of a Gauss-map remainder, whose nearest lattice point is 0; only
    such strings are extended. Prepending ``b`` maps ``z = p/q`` to
    ``q/(b q + p)``, whose denominator norm is ``N(q)/|z'|**2 > N(q)`` whenever
    ``z'`` lies in I_d, so pruning at ``N`` loses nothing.
    """
    F = field(d)
    table = CountTable.empty(N, w_grid)
    members = []
    # stack entries: (digits, p, q) with value p/q = [0; digits]
    stack = [((last,), (1, 0), last)]
    while stack:
        digits, p, q = stack.pop()
        nq = F.norm(q)
        if nq > N:
            continue
        x = F.mul(p, F.conj(q))
        if not F.in_domain_scaled(x, nq):
            continue
        if tuple(expand_pair(F, p, q)) == digits:
            table.record([max(nq, F.norm(p))], len(digits))
            members.append(_unit_normalized(F, p, q))
        if F.nearest_scaled(x, nq) != (0, 0):
            continue
        for b in alphabet:
            bq = F.mul(b, q)
            stack.append(((b,) + digits, q, (bq[0] + p[0], bq[1] + p[1])))
    return table, members


def _unit_normalized(F, alpha: Pair, beta: Pair) -> tuple[Pair, Pair]:
    e = max(F.units, key=lambda e: F.mul(e, beta))
    return F.mul(e, alpha), F.mul(e, beta)


def enumerate_complex(
    d: int,
    alphabet: Iterable[Pair],
    N: int,
    w_grid: Sequence[float] = DEFAULT_W_GRID,
    workers: int = 1,
    return_members: bool = False,
):
    """Count ``Omega_{N,A_d}`` keyed by height squared.

    Every counted string is checked by re-expanding its value, which stands in
    for the admissibility rules between consecutive digits.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    F = field(d)
    alphabet = tuple(sorted(set(tuple(a) for a in alphabet)))
    if any(F.norm(a) == 0 for a in alphabet):
        raise DomainError("0 is not a digit")
    grid = tuple(float(w) for w in w_grid)
    args = [(d, alphabet, N, a, grid) for a in alphabet]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_complex_subtree, *zip(*args)))
    else:
        results = [_complex_subtree(*a) for a in args]
    table = CountTable.empty(N, grid)
    members = []
    for sub, mem in results:
        table = table.merge(sub)
        members.extend(mem)
    if return_members:
        return table, sorted(members)
    return table


def brute_force_complex(
    alphabet: Iterable[Pair], d: int, N: int, w_grid: Sequence[float] = DEFAULT_W_GRID, return_members: bool = False
):
    """Reference table: scan all reduced ``alpha/beta`` in I_d with height squared ``<= N``."""
    F = field(d)
    allowed = set(tuple(a) for a in alphabet)
    grid = tuple(float(w) for w in w_grid)
    found: dict[tuple[int, int], int] = {}
    members = []
    numerators = F.lattice_points(N, min_norm=1)
    for beta in F.lattice_points(N, min_norm=1):
        if F.normalize_unit(beta) != beta:
            continue
        nb = F.norm(beta)
        for alpha in numerators:
            if F.norm(alpha) > nb:
                continue
            if not F.in_domain_scaled(F.mul(alpha, F.conj(beta)), nb):
                continue
            if F.norm(euclid_gcd_pair(F, alpha, beta)) != 1:
                continue
            digits = expand_pair(F, alpha, beta)
            if all(a in allowed for a in digits):
                key = (len(digits), max(nb, F.norm(alpha)))
                found[key] = found.get(key, 0) + 1
                members.append((alpha, beta))
    table = CountTable.empty(N, grid)
    for length, n in sorted(found):
        table.record(np.full(found[length, n], n), length)
    if return_members:
        return table, sorted(members)
    return table


# -- CSV ----------------------------------------------------------------------


def _w_name(w: float) -> str:
    return f"w_{w!r}"


def table_to_csv(table: CountTable) -> str:
    """CSV text: ``n, count, w_<value>...``; rows for nonzero counts plus ``n = N``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "count"] + [_w_name(w) for w in table.w_grid])
    rows = set(np.flatnonzero(table.counts).tolist()) | {table.N}
    for n in sorted(rows):
        writer.writerow(
            [n, int(table.counts[n])] + [f"{table.weighted[k, n]:.18g}" for k in range(len(table.w_grid))]
        )
    return buf.getvalue()


def table_from_csv(text: str) -> CountTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header[:2] != ["n", "count"]:
        raise ValueError("not a count table CSV")
    w_grid = tuple(float(h[2:]) for h in header[2:])
    rows = [r for r in reader if r]
    N = int(rows[-1][0])
    counts = np.zeros(N + 1, dtype=np.int64)
    weighted = np.zeros((len(w_grid), N + 1))
    for r in rows:
        n = int(r[0])
        counts[n] = int(r[1])
        for k in range(len(w_grid)):
            weighted[k, n] = float(r[2 + k])
    return CountTable(N, w_grid, counts, weighted=weighted)
