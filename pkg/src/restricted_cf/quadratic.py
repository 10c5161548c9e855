"""Nearest-integer continued fractions over norm-Euclidean imaginary quadratic fields.

Elements of Q(sqrt(-d)) are stored by exact coordinates ``(u, v)`` over the
module basis ``(1, w)`` where ``w = sqrt(-d)`` for d in {1, 2} and
``w = (1 + sqrt(-d))/2`` for d in {3, 7, 11}. Integral elements used in hot
loops are bare ``(int, int)`` tuples; ``QuadElement`` is the public exact type.

The fundamental domain ``I_d`` is the closed Voronoi cell of the origin in the
lattice O_d. Rounding to the nearest lattice point breaks exact ties by taking
the lexicographically smallest coordinate pair.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .realcf import DomainError

EUCLIDEAN_D = (1, 2, 3, 7, 11)

Pair = tuple[int, int]

# 3x3 neighbour block; contains every Voronoi-relevant vector for all five fields
_BLOCK = tuple((i, j) for i in (-1, 0, 1) for j in (-1, 0, 1))


@dataclass(frozen=True)
class FieldParams:
    d: int

    def __post_init__(self):
        if self.d not in EUCLIDEAN_D:
            raise DomainError(f"d must be one of {EUCLIDEAN_D}, got {self.d}")

    @property
    def hexagonal(self) -> bool:
        return self.d % 4 == 3

    @property
    def basis_kind(self) -> str:
        return "hexagonal" if self.hexagonal else "rectangular"

    @property
    def k(self) -> int:
        # w**2 = w - k for hexagonal fields, w**2 = -d otherwise
        return (1 + self.d) // 4 if self.hexagonal else self.d

    # -- arithmetic on coordinate pairs (ints or Fractions) ------------------

    def mul(self, x, y):
        a, b = x
        c, e = y
        if self.hexagonal:
            return (a * c - self.k * b * e, a * e + b * c + b * e)
        return (a * c - self.d * b * e, a * e + b * c)

    def norm(self, x):
        a, b = x
        if self.hexagonal:
            return a * a + a * b + self.k * b * b
        return a * a + self.d * b * b

    def conj(self, x):
        a, b = x
        if self.hexagonal:
            return (a + b, -b)
        return (a, -b)

    def to_complex(self, x) -> complex:
        a, b = x
        if self.hexagonal:
            return complex(float(a) + float(b) / 2, float(b) * math.sqrt(self.d) / 2)
        return complex(float(a), float(b) * math.sqrt(self.d))

    @property
    def units(self) -> tuple[Pair, ...]:
        if self.d == 1:
            return ((1, 0), (0, 1), (-1, 0), (0, -1))
        if self.d == 3:
            return ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
        return ((1, 0), (-1, 0))

    # -- lattice geometry -----------------------------------------------------

    def nearest_scaled(self, x: Pair, n: int) -> Pair:
        """Nearest lattice point to ``x/n`` for integer pair ``x`` and ``n > 0``."""
        X, Y = x
        u0 = (2 * X + n) // (2 * n)
        v0 = (2 * Y + n) // (2 * n)
        best = None
        best_dist = None
        for i, j in _BLOCK:
            mu = (u0 + i, v0 + j)
            dist = self.norm((X - n * mu[0], Y - n * mu[1]))
            if best is None or dist < best_dist or (dist == best_dist and mu < best):
                best, best_dist = mu, dist
        return best

    def in_domain_scaled(self, x: Pair, n: int, closed: bool = True) -> bool:
        """Is ``x/n`` in I_d (closed) or its interior (``closed=False``)?"""
        r = self.norm(x)
        X, Y = x
        for mu in _BLOCK:
            if mu == (0, 0):
                continue
            other = self.norm((X - n * mu[0], Y - n * mu[1]))
            if other < r or (not closed and other == r):
                return False
        return True

    def divides_exactly(self, x: Pair, y: Pair) -> Pair:
        """``x / y`` for integral pairs where the quotient is known to be integral."""
        num = self.mul(x, self.conj(y))
        n = self.norm(y)
        if num[0] % n or num[1] % n:
            raise DomainError(f"{x} is not divisible by {y} in O_{self.d}")
        return (num[0] // n, num[1] // n)

    def normalize_unit(self, beta: Pair) -> Pair:
        """Unit multiple of ``beta`` with lexicographically largest coordinates."""
        return max(self.mul(e, beta) for e in self.units)

    def lattice_points(self, max_norm: int, min_norm: int = 0) -> list[Pair]:
        """All lattice points with ``min_norm <= norm <= max_norm``, sorted."""
        out = []
        if self.hexagonal:
            vmax = math.isqrt(4 * max_norm // self.d + 4) + 1
        else:
            vmax = math.isqrt(max_norm // self.d + 1) + 1
        umax = math.isqrt(max_norm) + vmax + 1
        for v in range(-vmax, vmax + 1):
            for u in range(-umax, umax + 1):
                nm = self.norm((u, v))
                if min_norm <= nm <= max_norm:
                    out.append((u, v))
        out.sort()
        return out

    def format_pair(self, x) -> str:
        a, b = x
        return f"{a}{'+' if b >= 0 else '-'}{abs(b)}w"


@lru_cache(maxsize=None)
def field(d: int) -> FieldParams:
    return FieldParams(d)


@dataclass(frozen=True)
class QuadElement:
    """Exact element ``u + v*w`` of Q(sqrt(-d))."""

    d: int
    u: Fraction
    v: Fraction

    def __post_init__(self):
        field(self.d)
        object.__setattr__(self, "u", Fraction(self.u))
        object.__setattr__(self, "v", Fraction(self.v))

    @classmethod
    def of(cls, d: int, x) -> "QuadElement":
        if isinstance(x, QuadElement):
            return x
        if isinstance(x, tuple):
            return cls(d, Fraction(x[0]), Fraction(x[1]))
        return cls(d, Fraction(x), Fraction(0))

    @property
    def F(self) -> FieldParams:
        return field(self.d)

    @property
    def pair(self) -> tuple[Fraction, Fraction]:
        return (self.u, self.v)

    @property
    def is_integral(self) -> bool:
        return self.u.denominator == 1 and self.v.denominator == 1

    def int_pair(self) -> Pair:
        if not self.is_integral:
            raise DomainError(f"{self} is not in O_{self.d}")
        return (int(self.u), int(self.v))

    def scaled(self) -> tuple[Pair, int]:
        """``(x, n)`` with integer pair ``x`` and ``n >= 1`` such that self = x/n."""
        n = math.lcm(self.u.denominator, self.v.denominator)
        return (int(self.u * n), int(self.v * n)), n

    def norm(self) -> Fraction:
        return self.F.norm(self.pair)

    def conj(self) -> "QuadElement":
        return QuadElement(self.d, *self.F.conj(self.pair))

    def _coerce(self, other) -> "QuadElement":
        if isinstance(other, QuadElement):
            if other.d != self.d:
                raise DomainError("mixing elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadElement(self.d, Fraction(other), Fraction(0))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElement(self.d, self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __neg__(self):
        return QuadElement(self.d, -self.u, -self.v)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElement(self.d, self.u - o.u, self.v - o.v)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadElement(self.d, *self.F.mul(self.pair, o.pair))

    __rmul__ = __mul__

    def inverse(self) -> "QuadElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.F.conj(self.pair)
        return QuadElement(self.d, c[0] / n, c[1] / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __bool__(self):
        return bool(self.u) or bool(self.v)

    def __complex__(self):
        return self.F.to_complex(self.pair)

    def __str__(self):
        def fmt(q: Fraction) -> str:
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

        sign = "-" if self.v < 0 else "+"
        return f"{fmt(self.u)}{sign}{fmt(abs(self.v))}w"


ComplexDigits = tuple[QuadElement, ...]


def nearest_lattice_point(z: QuadElement) -> QuadElement:
    x, n = z.scaled()
    return QuadElement.of(z.d, z.F.nearest_scaled(x, n))


def in_fundamental_domain(z: QuadElement, closed: bool = True) -> bool:
    x, n = z.scaled()
    return z.F.in_domain_scaled(x, n, closed=closed)


def complex_gauss_step(z: QuadElement) -> tuple[QuadElement, QuadElement]:
    """``T_d(z)``: returns ``(alpha, 1/z - alpha)`` with alpha nearest to ``1/z``."""
    if not z:
        raise DomainError("complex_gauss_step is undefined at 0")
    if not in_fundamental_domain(z):
        raise DomainError(f"{z} is not in the closed fundamental domain I_{z.d}")
    inv = z.inverse()
    alpha = nearest_lattice_point(inv)
    return alpha, inv - alpha


def expand_pair(F: FieldParams, p: Pair, q: Pair, max_length: int = 10_000) -> list[Pair]:
    """Digits of ``p/q`` (integral pairs, ``q != 0``) by nearest-integer Euclid.

    ``p/q`` must lie in the closed fundamental domain; this is not rechecked.
    """
    digits = []
    while p != (0, 0):
        # 1/z = q/p = q * conj(p) / N(p)
        alpha = F.nearest_scaled(F.mul(q, F.conj(p)), F.norm(p))
        ap = F.mul(alpha, p)
        p, q = (q[0] - ap[0], q[1] - ap[1]), p
        digits.append(alpha)
        if len(digits) > max_length:
            raise RuntimeError(f"expansion exceeded {max_length} digits")
    return digits


def cf_expand_complex(z: QuadElement, max_length: int = 10_000) -> ComplexDigits:
    """Nearest-integer expansion of ``z`` in I_d; ``0`` gives the empty sequence."""
    if not in_fundamental_domain(z):
        raise DomainError(f"{z} is not in the closed fundamental domain I_{z.d}")
    x, n = z.scaled()
    digits = expand_pair(z.F, x, (n, 0), max_length=max_length)
    return tuple(QuadElement.of(z.d, a) for a in digits)


def reconstruct_pair(F: FieldParams, digits: Sequence[Pair]) -> tuple[Pair, Pair]:
    """Coprime ``(num, den)`` with ``num/den = [0; a_1, ..., a_l]``."""
    num, den = (0, 0), (1, 0)
    for a in reversed(digits):
        ad = F.mul(a, den)
        num, den = den, (ad[0] + num[0], ad[1] + num[1])
        if den == (0, 0):
            raise DomainError("zero denominator while reconstructing; inadmissible digits")
    return num, den


def reconstruct_complex(digits: Sequence[QuadElement]) -> QuadElement:
    if len(digits) == 0:
        raise DomainError("cannot reconstruct an empty digit sequence")
    d = digits[0].d
    num, den = reconstruct_pair(field(d), [a.int_pair() for a in digits])
    return QuadElement.of(d, num) / QuadElement.of(d, den)


def euclid_gcd_pair(F: FieldParams, a: Pair, b: Pair) -> Pair:
    if a == (0, 0) and b == (0, 0):
        raise DomainError("gcd(0, 0) is undefined")
    while b != (0, 0):
        mu = F.nearest_scaled(F.mul(a, F.conj(b)), F.norm(b))
        mb = F.mul(mu, b)
        a, b = b, (a[0] - mb[0], a[1] - mb[1])
    return a


def euclid_gcd(a: QuadElement, b: QuadElement) -> QuadElement:
    """A gcd of two integral elements; unique up to units."""
    F = a.F
    return QuadElement.of(a.d, euclid_gcd_pair(F, a.int_pair(), b.int_pair()))


def reduced_form(z: QuadElement) -> tuple[Pair, Pair]:
    """Coprime ``(alpha, beta)`` with ``z = alpha/beta`` and ``beta`` unit-normalized."""
    F = z.F
    x, n = z.scaled()
    g = euclid_gcd_pair(F, x, (n, 0))
    alpha = F.divides_exactly(x, g)
    beta = F.divides_exactly((n, 0), g)
    for e in F.units:
        if F.mul(e, beta) == F.normalize_unit(beta):
            return F.mul(e, alpha), F.mul(e, beta)
    raise AssertionError("unreachable")


def height_squared(z: QuadElement) -> int:
    """``ht(z)**2 = max(N(alpha), N(beta))`` for the reduced form ``alpha/beta``."""
    alpha, beta = reduced_form(z)
    return int(max(z.F.norm(alpha), z.F.norm(beta)))


# -- digit alphabets -----------------------------------------------------------


def _domain_samples(F: FieldParams, n: int = 48) -> np.ndarray:
    """Complex grid points strictly inside I_d."""
    t = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    U, V = np.meshgrid(t, t)
    pts = (U + V * F.to_complex((0, 1))).ravel()
    return pts[_inside(F, pts, margin=1e-9)]


def _inside(F: FieldParams, z: np.ndarray, margin: float = 0.0) -> np.ndarray:
    ok = np.ones(z.shape, dtype=bool)
    for mu in _BLOCK:
        if mu == (0, 0):
            continue
        m = F.to_complex(mu)
        # |z|^2 < |z - m|^2  <=>  Re(z conj m) < |m|^2 / 2
        ok &= (z * np.conj(m)).real < abs(m) ** 2 / 2 - margin
    return ok


@lru_cache(maxsize=None)
def attainable_digits(d: int, max_norm: int) -> tuple[Pair, ...]:
    """Digits ``alpha`` with ``O_alpha`` of nonempty interior and ``N(alpha) <= max_norm``.

    A digit is attainable when some point of ``alpha + int(I_d)`` inverts into
    ``int(I_d)``; this is decided on a dense sample of the shifted cell.
    """
    F = field(d)
    cell = _domain_samples(F)
    out = []
    for alpha in F.lattice_points(max_norm, min_norm=1):
        w = cell + F.to_complex(alpha)
        if np.any(_inside(F, 1.0 / w, margin=1e-9)):
            out.append(alpha)
    return tuple(out)


def unit_closure(F: FieldParams, digits: Iterable[Pair]) -> tuple[Pair, ...]:
    return tuple(sorted({F.mul(e, a) for a in digits for e in F.units}))


# -- parsing --------------------------------------------------------------------

_TOKEN = re.compile(r"([+-]?)(\d*)(w?)")


def parse_quad_integer(text: str) -> Pair:
    """Parse ``"a+bw"`` style literals (``"3-1w"``, ``"2w"``, ``"-5"``)."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty literal")
    a = b = 0
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        sign, digits, is_w = m.groups()
        if (not digits and not is_w) or (pos > 0 and not sign):
            raise ValueError(f"cannot parse {text!r}")
        coeff = (-1 if sign == "-" else 1) * (int(digits) if digits else 1)
        if is_w:
            b += coeff
        else:
            a += coeff
        pos = m.end()
    return (a, b)


def parse_quad_rational(text: str, d: int) -> QuadElement:
    """Parse ``"(a+bw)/(c+ew)"``, ``"(a+bw)/n"`` or ``"a+bw"``."""
    s = text.replace(" ", "")
    if "/" in s:
        num, den = s.split("/", 1)
    else:
        num, den = s, "1"
    num, den = num.strip("()"), den.strip("()")
    x = QuadElement.of(d, parse_quad_integer(num))
    y = QuadElement.of(d, parse_quad_integer(den))
    if not y:
        raise DomainError("zero denominator")
    return x / y
