"""Outward-rounded interval arithmetic on IEEE doubles.

Every primitive is evaluated in round-to-nearest (error <= 1/2 ulp) and the
endpoints are then pushed one ulp outward with ``nextafter``; the resulting
interval contains the exact result for all members of the operands. ``sqrt``
relies on IEEE correct rounding; ``log`` is built from an argument reduction
and an atanh series with an explicit remainder interval, since libm log
carries no rounding guarantee.

:class:`Interval` is the scalar type; :class:`IntervalArray` applies the same
rules elementwise for the vectorised certificate sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = ["Interval", "IntervalArray", "IntervalDomainError", "LN2", "interval_sum"]

_INF = math.inf


class IntervalDomainError(ArithmeticError):
    """An operation was applied outside its domain; certificates never clamp."""


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _exact_float_interval(x) -> tuple[float, float]:
    """Tightest double enclosure of a real given as int/float/Fraction/str."""
    if isinstance(x, float):
        return x, x
    q = Fraction(x)
    f = float(q)
    fq = Fraction(f)
    if fq == q:
        return f, f
    return (f, _up(f)) if fq < q else (_down(f), f)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __init__(self, lo, hi=None):
        if hi is None:
            lo_f, hi_f = _exact_float_interval(lo)
        else:
            lo_f = _exact_float_interval(lo)[0]
            hi_f = _exact_float_interval(hi)[1]
        if not (lo_f <= hi_f):
            raise IntervalDomainError(f"empty interval [{lo_f}, {hi_f}]")
        object.__setattr__(self, "lo", lo_f)
        object.__setattr__(self, "hi", hi_f)

    @staticmethod
    def _raw(lo: float, hi: float) -> "Interval":
        out = object.__new__(Interval)
        object.__setattr__(out, "lo", lo)
        object.__setattr__(out, "hi", hi)
        return out

    @staticmethod
    def _coerce(x) -> "Interval":
        return x if isinstance(x, Interval) else Interval(x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        q = Fraction(x) if not isinstance(x, Fraction) else x
        return Fraction(self.lo) <= q <= Fraction(self.hi)

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other) -> "Interval":
        o = Interval._coerce(other)
        return Interval._raw(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval._raw(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        o = Interval._coerce(other)
        return Interval._raw(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other) -> "Interval":
        return Interval._coerce(other) - self

    def __mul__(self, other) -> "Interval":
        o = Interval._coerce(other)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval._raw(_down(min(p)), _up(max(p)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        o = Interval._coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise IntervalDomainError(f"division by interval containing zero: {o}")
        p = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval._raw(_down(min(p)), _up(max(p)))

    def __rtruediv__(self, other) -> "Interval":
        return Interval._coerce(other) / self

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise IntervalDomainError(f"sqrt of interval with negative part: {self}")
        lo = math.sqrt(self.lo)
        return Interval._raw(max(0.0, _down(lo)) if lo > 0 else 0.0, _up(math.sqrt(self.hi)))

    pow_half = sqrt

    def __pow__(self, k: int) -> "Interval":
        return self.integer_pow(k)

    def integer_pow(self, k: int) -> "Interval":
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise IntervalDomainError("integer_pow requires a non-negative integer exponent")
        if k == 0:
            return Interval(1)
        if k % 2 == 0 and self.lo < 0.0 < self.hi:
            m = max(-self.lo, self.hi)
            base = Interval._raw(0.0, m)
        elif self.hi < 0.0 or (self.hi == 0.0 and self.lo < 0.0):
            r = (-self).integer_pow(k)
            return r if k % 2 == 0 else -r
        else:
            base = self
        result = Interval(1)
        b = base
        while k:
            if k & 1:
                result = result * b
            k >>= 1
            if k:
                b = b * b
        if base.lo >= 0.0:
            result = Interval._raw(max(result.lo, 0.0), result.hi)
        return result

    def log(self) -> "Interval":
        if not self.lo > 0.0:
            raise IntervalDomainError(f"log of interval not strictly positive: {self}")
        return Interval._raw(_log_point(self.lo).lo, _log_point(self.hi).hi)

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def to_list(self) -> list[float]:
        return [self.lo, self.hi]


def _atanh_series(z: Interval, hi_abs: float) -> Interval:
    """2 atanh(z) for |z| <= hi_abs < 1/2 with a rigorous tail enclosure."""
    z2 = z * z
    terms = [z]
    power = z
    k = 1
    # truncate once the next term is far below one ulp of the leading term
    while hi_abs ** (2 * k + 1) > 2.0**-60 * hi_abs and k < 200:
        power = power * z2
        terms.append(power / (2 * k + 1))
        k += 1
    # |sum_{j>=k} z^{2j+1}/(2j+1)| <= |z|^{2k+1} / ((2k+1)(1 - z^2))
    bound = Interval(hi_abs).integer_pow(2 * k + 1) / ((2 * k + 1) * (1 - Interval(hi_abs) * Interval(hi_abs)))
    total = Interval._raw(-bound.hi, bound.hi)
    # smallest terms first keeps the outward rounding of the partial sums small
    for t in reversed(terms):
        total = total + t
    return 2 * total


# ln 2 to 40 digits, truncated and rounded up; each bound is then rounded outward
LN2 = Interval(
    Fraction("0.6931471805599453094172321214581765680755"),
    Fraction("0.6931471805599453094172321214581765680756"),
)


def _log_point(x: float) -> Interval:
    m, e = math.frexp(x)  # exact: x = m 2^e, m in [1/2, 1)
    if m < math.sqrt(0.5):
        m *= 2.0
        e -= 1
    mi = Interval(m)
    z = (mi - 1) / (mi + 1)
    zabs = max(abs(z.lo), abs(z.hi))
    return _atanh_series(z, zabs) + LN2 * e


class IntervalArray:
    """Elementwise intervals with the same outward-rounding contract."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = np.asarray(lo, dtype=np.float64)
        hi = lo if hi is None else np.asarray(hi, dtype=np.float64)
        if np.any(lo > hi):
            raise IntervalDomainError("empty interval in array")
        self.lo = lo
        self.hi = hi

    @classmethod
    def exact(cls, values) -> "IntervalArray":
        """Point intervals for values exactly representable (e.g. integers < 2^53)."""
        v = np.asarray(values, dtype=np.float64)
        return cls(v, v)

    @classmethod
    def from_intervals(cls, items) -> "IntervalArray":
        items = list(items)
        return cls(np.array([i.lo for i in items]), np.array([i.hi for i in items]))

    def __len__(self) -> int:
        return self.lo.size

    def __getitem__(self, idx) -> "IntervalArray":
        return IntervalArray(self.lo[idx], self.hi[idx])

    @staticmethod
    def _coerce(x) -> "IntervalArray":
        if isinstance(x, IntervalArray):
            return x
        if isinstance(x, Interval):
            return IntervalArray(np.float64(x.lo), np.float64(x.hi))
        lo, hi = _exact_float_interval(x)
        return IntervalArray(np.float64(lo), np.float64(hi))

    def __add__(self, other) -> "IntervalArray":
        o = IntervalArray._coerce(other)
        return IntervalArray(np.nextafter(self.lo + o.lo, -_INF), np.nextafter(self.hi + o.hi, _INF))

    __radd__ = __add__

    def __neg__(self) -> "IntervalArray":
        return IntervalArray(-self.hi, -self.lo)

    def __sub__(self, other) -> "IntervalArray":
        o = IntervalArray._coerce(other)
        return IntervalArray(np.nextafter(self.lo - o.hi, -_INF), np.nextafter(self.hi - o.lo, _INF))

    def __rsub__(self, other) -> "IntervalArray":
        return IntervalArray._coerce(other) - self

    def __mul__(self, other) -> "IntervalArray":
        o = IntervalArray._coerce(other)
        a, b, c, d = self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi
        lo = np.minimum(np.minimum(a, b), np.minimum(c, d))
        hi = np.maximum(np.maximum(a, b), np.maximum(c, d))
        return IntervalArray(np.nextafter(lo, -_INF), np.nextafter(hi, _INF))

    __rmul__ = __mul__

    def mul_nonneg(self, other) -> "IntervalArray":
        """Product when both operands are known to be >= 0 (two products instead of four)."""
        o = IntervalArray._coerce(other)
        if np.any(self.lo < 0) or np.any(o.lo < 0):
            raise IntervalDomainError("mul_nonneg on negative operand")
        # a product of non-negatives is non-negative, so the lower end may stop at 0
        return IntervalArray(np.maximum(np.nextafter(self.lo * o.lo, -_INF), 0.0), np.nextafter(self.hi * o.hi, _INF))

    def __truediv__(self, other) -> "IntervalArray":
        o = IntervalArray._coerce(other)
        if np.any((o.lo <= 0.0) & (o.hi >= 0.0)):
            raise IntervalDomainError("division by interval containing zero")
        a, b, c, d = self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi
        lo = np.minimum(np.minimum(a, b), np.minimum(c, d))
        hi = np.maximum(np.maximum(a, b), np.maximum(c, d))
        return IntervalArray(np.nextafter(lo, -_INF), np.nextafter(hi, _INF))

    def __rtruediv__(self, other) -> "IntervalArray":
        return IntervalArray._coerce(other) / self

    def sqrt(self) -> "IntervalArray":
        if np.any(self.lo < 0):
            raise IntervalDomainError("sqrt of negative interval")
        return IntervalArray(np.maximum(np.nextafter(np.sqrt(self.lo), -_INF), 0.0), np.nextafter(np.sqrt(self.hi), _INF))

    def square(self) -> "IntervalArray":
        return self.integer_pow(2)

    def integer_pow(self, k: int) -> "IntervalArray":
        if k < 0:
            raise IntervalDomainError("negative exponent")
        if k == 0:
            return IntervalArray.exact(np.ones_like(self.lo))
        if np.any(self.lo < 0):
            if k % 2:
                raise IntervalDomainError("odd power of signed array interval unsupported")
            m = np.maximum(-self.lo, self.hi)
            low = np.where((self.lo <= 0) & (self.hi >= 0), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))
            base = IntervalArray(low, m)
        else:
            base = self
        result = None
        b = base
        while k:
            if k & 1:
                result = b if result is None else result.mul_nonneg(b)
            k >>= 1
            if k:
                b = b.mul_nonneg(b)
        return result

    def log(self) -> "IntervalArray":
        if np.any(self.lo <= 0):
            raise IntervalDomainError("log of non-positive interval")
        lo = np.empty_like(self.lo)
        hi = np.empty_like(self.hi)
        cache: dict[float, Interval] = {}
        for idx, (a, b) in enumerate(zip(self.lo.ravel(), self.hi.ravel())):
            la = cache.setdefault(a, _log_point(float(a)))
            lb = la if a == b else cache.setdefault(b, _log_point(float(b)))
            lo.flat[idx] = la.lo
            hi.flat[idx] = lb.hi
        return IntervalArray(lo, hi)

    def sum(self) -> Interval:
        return interval_sum(self)


def interval_sum(arr: IntervalArray) -> Interval:
    """Rigorous enclosure of the sum: fsum is correctly rounded, then one ulp outward."""
    if arr.lo.size == 0:
        return Interval(0)
    lo = math.fsum(arr.lo.ravel().tolist())
    hi = math.fsum(arr.hi.ravel().tolist())
    return Interval._raw(_down(lo), _up(hi))
