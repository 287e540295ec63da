"""Exact rational intervals used to enclose irrational quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction]

_HALF = Fraction(1, 2)


def as_fraction(v) -> Fraction:
    """Parse ints, Fractions, "p/q" strings and decimal strings exactly."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, float):
        # floats are taken at their decimal face value, never their binary expansion
        return Fraction(repr(v))
    raise TypeError(f"cannot convert {v!r} to an exact rational")


@dataclass(frozen=True)
class RatInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v: Number) -> "RatInterval":
        v = Fraction(v)
        return cls(v, v)

    @classmethod
    def hull(cls, *vals: Number) -> "RatInterval":
        vals = [Fraction(v) for v in vals]
        return cls(min(vals), max(vals))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def __float__(self) -> float:
        return float(self.mid)

    def __add__(self, other):
        if isinstance(other, RatInterval):
            return RatInterval(self.lo + other.lo, self.hi + other.hi)
        other = Fraction(other)
        return RatInterval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RatInterval):
            prods = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
            return RatInterval(min(prods), max(prods))
        other = Fraction(other)
        a, b = self.lo * other, self.hi * other
        return RatInterval(min(a, b), max(a, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RatInterval):
            if other.lo <= 0 <= other.hi:
                raise ZeroDivisionError("interval divisor contains 0")
            return self * RatInterval(1 / other.hi, 1 / other.lo)
        return self * (1 / Fraction(other))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RatInterval(Fraction(0), max(-self.lo, self.hi))

    def __contains__(self, v) -> bool:
        return self.lo <= v <= self.hi

    def overlaps(self, other: "RatInterval") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    # certified comparisons: True only if every enclosed value satisfies the relation
    def certainly_lt(self, other) -> bool:
        o = other.lo if isinstance(other, RatInterval) else Fraction(other)
        return self.hi < o

    def certainly_le(self, other) -> bool:
        o = other.lo if isinstance(other, RatInterval) else Fraction(other)
        return self.hi <= o

    def certainly_gt(self, other) -> bool:
        o = other.hi if isinstance(other, RatInterval) else Fraction(other)
        return self.lo > o

    def certainly_ge(self, other) -> bool:
        o = other.hi if isinstance(other, RatInterval) else Fraction(other)
        return self.lo >= o

    def pow(self, e: int) -> "RatInterval":
        if e < 0:
            raise ValueError("negative exponent")
        if e % 2 == 1:
            return RatInterval(self.lo ** e, self.hi ** e)
        a = abs(self)
        return RatInterval(a.lo ** e, a.hi ** e)

    def dist_to_int(self) -> "RatInterval":
        """Image of the interval under z -> ||z||.

        ||.|| is 1-Lipschitz, so the image is [min, max] over the interval; the
        minimum is 0 when an integer is inside, the maximum 1/2 when a
        half-integer is inside.
        """
        lo_e = _nearest_dist(self.lo)
        hi_e = _nearest_dist(self.hi)
        lo = Fraction(0) if _contains_int(self) else min(lo_e, hi_e)
        hi = _HALF if _contains_half(self) else max(lo_e, hi_e)
        return RatInterval(lo, hi)

    def frac(self) -> "RatInterval":
        """Fractional part; the interval must not contain an integer in its interior."""
        f = math.floor(self.lo)
        if self.hi > f + 1 or (self.hi == f + 1 and self.lo < self.hi):
            raise ValueError("interval straddles an integer")
        return RatInterval(self.lo - f, self.hi - f)

    def as_strings(self) -> tuple[str, str]:
        return fmt(self.lo), fmt(self.hi)

    def __repr__(self) -> str:
        return f"[{fmt(self.lo)}, {fmt(self.hi)}]"


def _nearest_dist(z: Fraction) -> Fraction:
    return abs(z - round_half_up(z))


def round_half_up(z: Fraction) -> int:
    return math.floor(z + _HALF)


def _contains_int(iv: RatInterval) -> bool:
    return math.floor(iv.hi) >= math.ceil(iv.lo)


def _contains_half(iv: RatInterval) -> bool:
    return math.floor(iv.hi - _HALF) >= math.ceil(iv.lo - _HALF)


def fmt(v: Fraction) -> str:
    """Serialise an exact rational as "num/den" (or "num" when integral)."""
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def sqrt_enclosure(v: Number, bits: int = 128) -> RatInterval:
    """Enclosure of sqrt(v) of width <= 2**-bits (exact when v is a square)."""
    v = Fraction(v)
    if v < 0:
        raise ValueError("negative radicand")
    num, den = v.numerator, v.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return RatInterval.point(Fraction(rn, rd))
    scale = 1 << bits
    # floor(sqrt(v) * scale) = isqrt(floor(v * scale^2))
    s = math.isqrt((num * scale * scale) // den)
    return RatInterval(Fraction(s, scale), Fraction(s + 1, scale))
