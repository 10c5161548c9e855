"""Exact regular continued fractions of rationals in (0, 1).

Rationals are ``fractions.Fraction`` values (always in lowest terms) and digit
sequences are plain tuples of positive ints. Expansions use the canonical
form whose last digit is at least 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Digits = tuple[int, ...]


class DomainError(ValueError):
    """Input lies outside the domain of an operation."""


def as_rational(x: Fraction | int | str) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def gauss_step(x: Fraction) -> tuple[int, Fraction]:
    """One step of the Gauss map: returns ``(floor(1/x), 1/x - floor(1/x))``."""
    x = as_rational(x)
    if not 0 < x <= 1:
        raise DomainError(f"gauss_step needs 0 < x <= 1, got {x}")
    digit, rem = divmod(x.denominator, x.numerator)
    return digit, Fraction(rem, x.numerator)


def cf_expand(x: Fraction) -> Digits:
    """Canonical digits of ``x`` in (0, 1); the last digit is always >= 2."""
    x = as_rational(x)
    if not 0 < x < 1:
        raise DomainError(f"cf_expand needs 0 < x < 1, got {x}")
    # plain Euclid on (q, p); terminal digit is >= 2 automatically for x < 1
    p, q = x.numerator, x.denominator
    digits = []
    while p:
        a, r = divmod(q, p)
        digits.append(a)
        q, p = p, r
    return tuple(digits)


def reconstruct(digits: Sequence[int]) -> Fraction:
    """Evaluate ``[0; a_1, ..., a_l]`` bottom-up in exact arithmetic."""
    if len(digits) == 0:
        raise DomainError("cannot reconstruct an empty digit sequence")
    if any(a < 1 for a in digits):
        raise DomainError(f"digits must be >= 1, got {list(digits)}")
    num, den = 0, 1  # value of the tail, num/den
    for a in reversed(digits):
        num, den = den, a * den + num
    return Fraction(num, den)


@dataclass(frozen=True)
class ContinuantPair:
    """Convergent numerators/denominators ``(p_{k-1}, p_k, q_{k-1}, q_k)``.

    The identity pair corresponds to the empty digit string; applying digits
    ``a_1..a_k`` gives ``p_k / q_k = [0; a_1, ..., a_k]``.
    """

    p_prev: int = 1
    p_cur: int = 0
    q_prev: int = 0
    q_cur: int = 1

    def determinant(self) -> int:
        return self.p_cur * self.q_prev - self.p_prev * self.q_cur

    def value(self) -> Fraction:
        return Fraction(self.p_cur, self.q_cur)


IDENTITY = ContinuantPair()


def apply_digit(c: ContinuantPair, a: int) -> ContinuantPair:
    if a < 1:
        raise DomainError(f"digit must be >= 1, got {a}")
    return ContinuantPair(
        p_prev=c.p_cur,
        p_cur=a * c.p_cur + c.p_prev,
        q_prev=c.q_cur,
        q_cur=a * c.q_cur + c.q_prev,
    )


def continuants(digits: Iterable[int]) -> ContinuantPair:
    c = IDENTITY
    for a in digits:
        c = apply_digit(c, a)
    return c


def branch_derivative_at_zero(digits: Sequence[int]) -> Fraction:
    """``|h'(0)|`` for ``h = h_{a_1} o ... o h_{a_l}``, which is ``1/q_l**2``."""
    if len(digits) == 0:
        raise DomainError("empty digit sequence")
    q = continuants(digits).q_cur
    return Fraction(1, q * q)


def is_zaremba_denominator(N: int, A: int) -> bool:
    """True iff some ``a/N`` with ``gcd(a, N) = 1`` has all digits ``<= A``."""
    if N < 2 or A < 2:
        raise DomainError(f"need N >= 2 and A >= 2, got N={N}, A={A}")
    for a in range(1, N):
        if gcd(a, N) == 1 and max(cf_expand(Fraction(a, N))) <= A:
            return True
    return False
