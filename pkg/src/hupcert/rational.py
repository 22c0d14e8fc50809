"""Rational detection for angles and offset ratios via simplest fractions in an interval."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

# Doubles carry about 1e-16 relative precision on theta/pi in (0, 1); a band of 1e-14
# keeps rounding inside it while leaving a generic irrational's smallest
# approximating denominator well above 10^6.
ANGLE_TOL = 1e-14
MAXDEN = 10**6


@dataclass(frozen=True)
class Rational:
    p: int
    q: int

    @property
    def value(self) -> float:
        return self.p / self.q


@dataclass(frozen=True)
class IrrationalUpTo:
    maxden: int


RationalVerdict = Union[Rational, IrrationalUpTo]


def simplest_fraction(lo: Fraction, hi: Fraction) -> Fraction:
    """The fraction with the smallest denominator in the closed interval ``[lo, hi]``."""
    if lo > hi:
        lo, hi = hi, lo
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_fraction(-hi, -lo)
    n = math.floor(lo)
    if Fraction(n) == lo:
        return Fraction(n)
    if n + 1 <= hi:
        return Fraction(n + 1)
    # lo and hi share the integer part n: recurse on the reciprocals of the fractional parts
    return n + 1 / simplest_fraction(1 / (hi - n), 1 / (lo - n))


def rational_approx(x: float, maxden: int = MAXDEN, tol: float = ANGLE_TOL) -> RationalVerdict:
    """``Rational(p, q)`` for the smallest ``q <= maxden`` with ``|x - p/q| <= tol``."""
    fx = Fraction(x)
    ft = Fraction(tol)
    f = simplest_fraction(fx - ft, fx + ft)
    if f.denominator <= maxden:
        return Rational(f.numerator, f.denominator)
    return IrrationalUpTo(maxden)


def rational_angle(theta: float, maxden: int = MAXDEN, tol: float = ANGLE_TOL) -> RationalVerdict:
    """Is ``theta / pi`` a fraction with denominator at most ``maxden`` (within ``tol``)?"""
    if not 0 < theta < math.pi:
        raise ValueError("theta must lie in (0, pi)")
    return rational_approx(theta / math.pi, maxden, tol)


def integer_relation(a: float, b: float, maxden: int = MAXDEN, tol: float = ANGLE_TOL):
    """Integers ``(m, n)``, not both zero, ``|m|, |n| <= maxden``, with ``m a + n b ≈ 0``; else ``None``.

    Both numbers must be nonzero. The test is relative: ``b / a`` is compared to ``-m / n``.
    """
    if a == 0 or b == 0:
        raise ValueError("relation search needs nonzero inputs")
    if abs(b) > abs(a):
        rel = integer_relation(b, a, maxden, tol)
        return None if rel is None else (rel[1], rel[0])
    r = b / a
    verdict = rational_approx(r, maxden, tol * max(1.0, abs(r)))
    if isinstance(verdict, Rational) and abs(verdict.p) <= maxden:
        # b/a = p/q  =>  p a - q b = 0
        return (verdict.p, -verdict.q)
    return None
