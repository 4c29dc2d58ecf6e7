"""Exact arithmetic on an elliptic curve over Q.

Long Weierstrass model y^2 + a1*x*y + a3*y = x^3 + a2*x^2 + a4*x + a6 with
integer coefficients.  All point arithmetic uses exact rationals so group-law
identities hold as literal equalities.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import InfinityPoint, SingularCurve
from .nt import divisors, factorize, is_prime, sieve_primes

MAZUR_ORDER_CAP = 16  # largest possible rational torsion subgroup order


@dataclass(frozen=True)
class CurveQ:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    disc: int

    @cached_property
    def b2(self):
        return self.a1 * self.a1 + 4 * self.a2

    @cached_property
    def b4(self):
        return 2 * self.a4 + self.a1 * self.a3

    @cached_property
    def b6(self):
        return self.a3 * self.a3 + 4 * self.a6

    @cached_property
    def b8(self):
        return (
            self.a1 * self.a1 * self.a6
            + 4 * self.a2 * self.a6
            - self.a1 * self.a3 * self.a4
            + self.a2 * self.a3 * self.a3
            - self.a4 * self.a4
        )

    @cached_property
    def c4(self):
        return self.b2 * self.b2 - 24 * self.b4

    @cached_property
    def c6(self):
        return -self.b2 ** 3 + 36 * self.b2 * self.b4 - 216 * self.b6

    def coefficients(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def __repr__(self):
        return f"CurveQ{self.coefficients()}"


@dataclass(frozen=True)
class PointQ:
    x: Fraction | None
    y: Fraction | None

    @property
    def is_infinity(self):
        return self.x is None

    @cached_property
    def canonical(self):
        """The unique triple (m, n, k) with x = m/k^2, y = n/k^3, k >= 1."""
        if self.is_infinity:
            raise InfinityPoint("canonical form is defined for affine points only")
        k = math.isqrt(self.x.denominator)
        if k * k != self.x.denominator or self.y.denominator != k ** 3:
            raise ValueError(
                "point does not have the (m/k^2, n/k^3) shape expected of a "
                "rational point on an integral model"
            )
        return (self.x.numerator, self.y.numerator, k)

    def __repr__(self):
        if self.is_infinity:
            return "PointQ(inf)"
        return f"PointQ({self.x}, {self.y})"


INFINITY = PointQ(None, None)


def point(x, y):
    return PointQ(Fraction(x), Fraction(y))


@dataclass(frozen=True)
class TorsionGroup:
    points: tuple
    order: int


def discriminant(a1, a2, a3, a4, a6):
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def parse_curve(a1, a2, a3, a4, a6):
    coeffs = (a1, a2, a3, a4, a6)
    if any(not isinstance(c, int) for c in coeffs):
        raise TypeError("Weierstrass coefficients must be integers")
    disc = discriminant(*coeffs)
    if disc == 0:
        raise SingularCurve(f"coefficients {coeffs} give discriminant 0")
    return CurveQ(a1, a2, a3, a4, a6, disc)


def on_curve(curve, p):
    if p.is_infinity:
        return True
    x, y = p.x, p.y
    lhs = y * y + curve.a1 * x * y + curve.a3 * y
    rhs = x ** 3 + curve.a2 * x * x + curve.a4 * x + curve.a6
    return lhs == rhs


def negate(curve, p):
    if p.is_infinity:
        return INFINITY
    return PointQ(p.x, -p.y - curve.a1 * p.x - curve.a3)


def add(curve, p, q):
    """Chord-tangent sum of two points, exact."""
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    x1, y1 = p.x, p.y
    x2, y2 = q.x, q.y
    if x1 == x2:
        if y2 == -y1 - curve.a1 * x1 - curve.a3:
            return INFINITY
        lam = (3 * x1 * x1 + 2 * curve.a2 * x1 + curve.a4 - curve.a1 * y1) / (
            2 * y1 + curve.a1 * x1 + curve.a3
        )
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + curve.a1 * lam - curve.a2 - x1 - x2
    y3 = -(lam + curve.a1) * x3 - nu - curve.a3
    return PointQ(x3, y3)


def scalar_mul(curve, n, p):
    if n < 0:
        return scalar_mul(curve, -n, negate(curve, p))
    acc = INFINITY
    base = p
    while n:
        if n & 1:
            acc = add(curve, acc, base)
        base = add(curve, base, base)
        n >>= 1
    return acc


def canonical_form(p):
    """(m, n, k) with x = m/k^2, y = n/k^3, k >= 1, gcd(m,k) = gcd(n,k) = 1."""
    return p.canonical


def is_good_reduction(curve, p):
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return curve.disc % p != 0


def point_order(curve, p, cap=MAZUR_ORDER_CAP):
    """Smallest n <= cap with n*P = O, or None if P has larger (likely
    infinite) order.  By Mazur's bound, None with cap=16 certifies infinite
    order for a rational point."""
    acc = p
    for n in range(1, cap + 1):
        if acc.is_infinity:
            return n
        acc = add(curve, acc, p)
    return None


def good_primes(curve, limit, count=None):
    """Ascending primes of good reduction up to limit (or the first `count`)."""
    out = []
    for q in sieve_primes(limit):
        if curve.disc % q != 0:
            out.append(q)
            if count is not None and len(out) >= count:
                break
    return out


def _torsion_order_bound(curve):
    """gcd of N_p over the first few good primes; a multiple of the torsion
    order since reduction is injective on torsion at good primes."""
    from . import ec_finite

    bound = 0
    for q in good_primes(curve, 200, count=5):
        np_ = ec_finite.group_order(ec_finite.reduce_curve(curve, q)).n
        bound = math.gcd(bound, np_)
        if bound == 1:
            return 1
    return bound if bound else 1


def _short_model_integer_candidates(curve):
    """Torsion-point candidates on the integral short model
    Y^2 = X^3 + A*X + B obtained from the curve by the standard scaling
    X = 36*x + 3*b2, Y = 108*(2*y + a1*x + a3).

    By Lutz-Nagell on that model, torsion points are integral with Y = 0 or
    Y^2 dividing 4A^3 + 27B^2.
    """
    A = -27 * curve.c4
    B = -54 * curve.c6
    d = abs(4 * A ** 3 + 27 * B * B)
    assert d == 2 ** 8 * 3 ** 12 * abs(curve.disc)
    sqrt_part = 1
    for prime, exp in factorize(d):
        sqrt_part *= prime ** (exp // 2)
    candidates = set()
    for y in [0] + divisors(sqrt_part):
        c0 = B - y * y
        roots = set()
        if c0 == 0:
            roots.add(0)
            if A <= 0:
                r = math.isqrt(-A)
                if r * r == -A:
                    roots.update((r, -r))
        else:
            for dv in divisors(abs(c0)):
                for x in (dv, -dv):
                    if x ** 3 + A * x + c0 == 0:
                        roots.add(x)
        for x in roots:
            candidates.add((x, y))
            candidates.add((x, -y))
    return candidates


def torsion_subgroup(curve):
    """The full rational torsion subgroup.

    The order is first bounded by gcd(N_p) over several good primes; when
    that gcd is 1 the group is trivial and no point search is needed.
    Otherwise candidates come from Lutz-Nagell enumeration on a scaled short
    model, each verified exactly (on-curve and of finite order <= 16).
    """
    members = {INFINITY}
    if _torsion_order_bound(curve) > 1:
        b2, a1, a3 = curve.b2, curve.a1, curve.a3
        for bigx, bigy in _short_model_integer_candidates(curve):
            x = Fraction(bigx - 3 * b2, 36)
            y = (Fraction(bigy, 108) - a1 * x - a3) / 2
            cand = PointQ(x, y)
            if on_curve(curve, cand) and point_order(curve, cand) is not None:
                members.add(cand)
    # candidates are a superset of the torsion subgroup, so the verified set
    # must already be closed; the assert guards the enumeration.
    for p in list(members):
        for q in list(members):
            assert add(curve, p, q) in members, "torsion candidate set not closed"
    assert len(members) <= MAZUR_ORDER_CAP
    pts = tuple(
        sorted(members, key=lambda p: (not p.is_infinity, p.x or 0, p.y or 0))
    )
    return TorsionGroup(points=pts, order=len(pts))
