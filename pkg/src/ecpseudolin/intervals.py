"""Outward-rounded interval arithmetic over machine floats.

Every operation returns an interval guaranteed to contain the exact real
result whenever the operands contain theirs.  Directed rounding is emulated
by widening each endpoint with `math.nextafter`, which over-covers the at
most 0.5 ulp error of a correctly rounded float operation.  Logarithms of
huge integers are certified from the top bits plus an enclosure of log 2.
"""

import math
from dataclasses import dataclass

_INF = math.inf

# Enclosure of log 2; true value 0.69314718055994530941...
_LN2_LO = 0.6931471805599452
_LN2_HI = 0.6931471805599454


def _dn(x):
    return math.nextafter(x, -_INF)


def _up(x):
    return math.nextafter(x, _INF)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @staticmethod
    def exact(v):
        v = float(v)
        return Interval(v, v)

    @staticmethod
    def zero():
        return Interval(0.0, 0.0)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    def contains(self, x):
        return self.lo <= x <= self.hi

    def strictly_positive(self):
        return self.lo > 0.0

    def strictly_negative(self):
        return self.hi < 0.0

    def __add__(self, other):
        other = _coerce(other)
        return Interval(_dn(self.lo + other.lo), _up(self.hi + other.hi))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        prods = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(_dn(min(prods)), _up(max(prods)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.lo <= 0.0 <= other.hi:
            raise ZeroDivisionError("interval division by interval containing 0")
        quots = (
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        )
        return Interval(_dn(min(quots)), _up(max(quots)))

    def log(self):
        """Enclosure of the natural log; requires a strictly positive interval."""
        if self.lo <= 0.0:
            raise ValueError("log requires a strictly positive interval")
        return Interval(_dn(_dn(math.log(self.lo))), _up(_up(math.log(self.hi))))

    def hull(self, other):
        other = _coerce(other)
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"


def _coerce(v):
    if isinstance(v, Interval):
        return v
    return Interval.exact(v)


def log_of_int(n):
    """Certified enclosure of log(n) for an arbitrarily large integer n >= 1."""
    n = int(n)
    if n < 1:
        raise ValueError("log_of_int requires n >= 1")
    if n == 1:
        return Interval.zero()
    bits = n.bit_length()
    if bits <= 52:
        v = math.log(n)
        return Interval(_dn(_dn(v)), _up(_up(v)))
    # n = t * 2^shift + r with 0 <= r < 2^shift, so t*2^shift <= n < (t+1)*2^shift
    shift = bits - 52
    t = n >> shift
    lo = _dn(_dn(_dn(math.log(t)) + _dn(shift * _LN2_LO)))
    hi = _up(_up(_up(math.log(t + 1)) + _up(shift * _LN2_HI)))
    return Interval(lo, hi)


def log_of_rational(num, den):
    """Certified enclosure of log(num/den) for positive integers num, den."""
    return log_of_int(num) - log_of_int(den)


def det(matrix):
    """Interval determinant by Laplace expansion; fine for the small (<=4x4)
    Gram matrices used here."""
    k = len(matrix)
    if k == 1:
        return matrix[0][0]
    total = Interval.zero()
    for j, head in enumerate(matrix[0]):
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = head * det(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def solve(matrix, rhs):
    """Solve a small interval linear system by Cramer's rule.

    Raises ZeroDivisionError when the determinant interval contains 0, which
    callers surface as an inconclusive-precision condition.
    """
    d = det(matrix)
    out = []
    for j in range(len(rhs)):
        col = [
            [rhs[i] if jj == j else matrix[i][jj] for jj in range(len(rhs))]
            for i in range(len(rhs))
        ]
        out.append(det(col) / d)
    return out
