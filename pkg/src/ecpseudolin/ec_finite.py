"""Curve arithmetic over prime fields: orders, structure, discrete logs.

Points are `None` (infinity) or `(x, y)` residue tuples.  Group orders come
from exhaustive quadratic-character counting for small p and a baby-step
giant-step search in the Hasse interval above the enumeration threshold.
"""

import math
import random
from dataclasses import dataclass
from functools import lru_cache

from .errors import BadReduction
from .nt import factorize, sqrt_mod_prime

ENUMERATION_THRESHOLD = 10_000


@dataclass(frozen=True)
class CurveFp:
    p: int
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    @property
    def b2(self):
        return (self.a1 * self.a1 + 4 * self.a2) % self.p

    @property
    def b4(self):
        return (2 * self.a4 + self.a1 * self.a3) % self.p

    @property
    def b6(self):
        return (self.a3 * self.a3 + 4 * self.a6) % self.p


@dataclass(frozen=True)
class GroupOrderFp:
    n: int
    factorization: tuple


@dataclass(frozen=True)
class GroupStructureFp:
    """E(F_p) = Z/d1 x Z/d2 with d1 | d2.  `gens` holds (g2, g1) where g2 has
    order d2 and together they generate the full group."""

    d1: int
    d2: int
    gens: tuple


def reduce_curve(curve, p):
    if curve.disc % p == 0:
        raise BadReduction(f"prime {p} divides the discriminant {curve.disc}")
    return CurveFp(p, curve.a1 % p, curve.a2 % p, curve.a3 % p, curve.a4 % p, curve.a6 % p)


def on_curve_fp(cp, pt):
    if pt is None:
        return True
    x, y = pt
    p = cp.p
    lhs = (y * y + cp.a1 * x * y + cp.a3 * y) % p
    rhs = (x * x * x + cp.a2 * x * x + cp.a4 * x + cp.a6) % p
    return lhs == rhs


def negate_fp(cp, pt):
    if pt is None:
        return None
    x, y = pt
    return (x, (-y - cp.a1 * x - cp.a3) % cp.p)


def add_fp(cp, pt1, pt2):
    if pt1 is None:
        return pt2
    if pt2 is None:
        return pt1
    p = cp.p
    x1, y1 = pt1
    x2, y2 = pt2
    if x1 == x2:
        if (y1 + y2 + cp.a1 * x1 + cp.a3) % p == 0:
            return None
        num = (3 * x1 * x1 + 2 * cp.a2 * x1 + cp.a4 - cp.a1 * y1) % p
        den = (2 * y1 + cp.a1 * x1 + cp.a3) % p
    else:
        num = (y2 - y1) % p
        den = (x2 - x1) % p
    lam = num * pow(den, p - 2, p) % p
    x3 = (lam * lam + cp.a1 * lam - cp.a2 - x1 - x2) % p
    y3 = (lam * (x1 - x3) - y1 - cp.a1 * x3 - cp.a3) % p
    return (x3, y3)


def scalar_mul_fp(cp, n, pt):
    if n < 0:
        return scalar_mul_fp(cp, -n, negate_fp(cp, pt))
    acc = None
    base = pt
    while n:
        if n & 1:
            acc = add_fp(cp, acc, base)
        base = add_fp(cp, base, base)
        n >>= 1
    return acc


def _rhs_complete_square(cp, x):
    """g(x) = (2y + a1*x + a3)^2 = 4*f(x) + (a1*x + a3)^2 mod odd p."""
    p = cp.p
    f = (x * x * x + cp.a2 * x * x + cp.a4 * x + cp.a6) % p
    t = (cp.a1 * x + cp.a3) % p
    return (4 * f + t * t) % p


def enumerate_points(cp):
    """All affine points, by direct solution of the curve equation."""
    p = cp.p
    pts = []
    if p == 2:
        for x in range(2):
            for y in range(2):
                if on_curve_fp(cp, (x, y)):
                    pts.append((x, y))
        return pts
    inv2 = pow(2, p - 2, p)
    roots = {}
    for s in range(p):
        roots.setdefault(s * s % p, []).append(s)
    for x in range(p):
        for s in roots.get(_rhs_complete_square(cp, x), []):
            y = (s - cp.a1 * x - cp.a3) * inv2 % p
            pts.append((x, y))
    return pts


def _order_by_enumeration(cp):
    p = cp.p
    if p == 2:
        return 1 + len(enumerate_points(cp))
    qr = bytearray(p)
    for s in range(p):
        qr[s * s % p] = 1
    total = 1  # infinity
    for x in range(p):
        g = _rhs_complete_square(cp, x)
        if g == 0:
            total += 1
        elif qr[g]:
            total += 2
    return total


def _random_point(cp, rng):
    p = cp.p
    if p < 60:
        pts = enumerate_points(cp)
        return pts[rng.randrange(len(pts))] if pts else None
    inv2 = pow(2, p - 2, p)
    while True:
        x = rng.randrange(p)
        s = sqrt_mod_prime(_rhs_complete_square(cp, x), p)
        if s is None:
            continue
        y = (s - cp.a1 * x - cp.a3) * inv2 % p
        return (x, y)


def _smallest_annihilator_in_window(cp, pt, lo, hi):
    """Smallest k in [lo, hi] with k*pt = infinity, by BSGS.  Always exists
    because the group order lies in the Hasse window."""
    width = hi - lo + 1
    m = math.isqrt(width) + 1
    baby = {}
    acc = None
    for j in range(m):
        baby.setdefault(acc, j)
        acc = add_fp(cp, acc, pt)
    giant_step = scalar_mul_fp(cp, m, pt)
    cur = scalar_mul_fp(cp, lo, pt)
    for i in range(m + 1):
        j = baby.get(negate_fp(cp, cur))
        if j is not None and lo + i * m + j <= hi:
            return lo + i * m + j
        cur = add_fp(cp, cur, giant_step)
    raise AssertionError("Hasse window contained no annihilator")


def _order_from_multiple(cp, pt, multiple):
    """Exact order of pt given any multiple of it, by stripping primes."""
    order = multiple
    for q, _ in factorize(multiple):
        while order % q == 0 and scalar_mul_fp(cp, order // q, pt) is None:
            order //= q
    return order


def _order_by_bsgs(cp):
    p = cp.p
    half = math.isqrt(4 * p)
    lo, hi = p + 1 - half, p + 1 + half
    exponent = 1
    for attempt in range(40):
        rng = random.Random(p * 1_000_003 + attempt)
        pt = _random_point(cp, rng)
        if pt is None:
            return 1
        k = _smallest_annihilator_in_window(cp, pt, max(lo, 1), hi)
        exponent = math.lcm(exponent, _order_from_multiple(cp, pt, k))
        first = (max(lo, 1) + exponent - 1) // exponent * exponent
        multiples = list(range(first, hi + 1, exponent))
        if len(multiples) == 1:
            return multiples[0]
    # Ambiguity after many samples is vanishingly rare; resolve exactly.
    return _order_by_enumeration(cp)


@lru_cache(maxsize=None)
def _group_order_cached(cp, method):
    if method == "enumerate" or (method == "auto" and cp.p <= ENUMERATION_THRESHOLD):
        n = _order_by_enumeration(cp)
    else:
        n = _order_by_bsgs(cp)
    assert (n - cp.p - 1) ** 2 <= 4 * cp.p, "Hasse bound violated"
    return GroupOrderFp(n=n, factorization=tuple(factorize(n)))


def group_order(cp, method="auto"):
    """Exact N_p with its factorization.  `method` can force a path:
    "enumerate" (O(p) character sums) or "bsgs" (Hasse-interval search)."""
    if method not in ("auto", "enumerate", "bsgs"):
        raise ValueError(f"unknown method {method!r}")
    return _group_order_cached(cp, method)


def point_order(cp, pt, order_fp):
    """Exact order of pt via the factorization of the group order."""
    order = order_fp.n
    for q, _ in order_fp.factorization:
        while order % q == 0 and scalar_mul_fp(cp, order // q, pt) is None:
            order //= q
    return order


def _bsgs_prime_log(cp, base, target, q):
    """x in [0, q) with x*base = target where base has order q, else None."""
    m = math.isqrt(q) + 1
    baby = {}
    acc = None
    for j in range(m):
        baby.setdefault(acc, j)
        acc = add_fp(cp, acc, base)
    giant = negate_fp(cp, scalar_mul_fp(cp, m, base))
    cur = target
    for i in range(m + 1):
        j = baby.get(cur)
        if j is not None:
            return (i * m + j) % q
        cur = add_fp(cp, cur, giant)
    return None


def discrete_log(cp, base, target, base_order):
    """Smallest k >= 0 with k*base = target, or None when target is outside
    the cyclic group generated by base.  Pohlig-Hellman over the factorization
    of base_order with BSGS for each prime level."""
    if target is None:
        return 0
    residues = []
    moduli = []
    for q, e in factorize(base_order):
        qe = q ** e
        cof = base_order // qe
        base_i = scalar_mul_fp(cp, cof, base)
        target_i = scalar_mul_fp(cp, cof, target)
        base_prime = scalar_mul_fp(cp, qe // q, base_i)
        x = 0
        for k in range(e):
            shifted = add_fp(
                cp, target_i, negate_fp(cp, scalar_mul_fp(cp, x, base_i))
            )
            t_k = scalar_mul_fp(cp, q ** (e - 1 - k), shifted)
            d = _bsgs_prime_log(cp, base_prime, t_k, q)
            if d is None:
                return None
            x += d * q ** k
        residues.append(x)
        moduli.append(qe)
    k = 0
    mod = 1
    for r, m in zip(residues, moduli):
        # CRT fold
        t = (r - k) * pow(mod, -1, m) % m
        k += mod * t
        mod *= m
    k %= base_order
    if scalar_mul_fp(cp, k, base) != target:
        return None
    return k


def _merge_to_lcm(cp, pt_a, ord_a, pt_b, ord_b):
    """A point of order lcm(ord_a, ord_b) built from per-prime components."""
    target = math.lcm(ord_a, ord_b)
    u = 1
    for q, e in factorize(target):
        if ord_a % q ** e == 0:
            u *= q ** e
    # u collects the primes where pt_a already realizes the lcm valuation
    v = target // u
    comp_a = scalar_mul_fp(cp, ord_a // u, pt_a)
    comp_b = scalar_mul_fp(cp, ord_b // v, pt_b)
    merged = add_fp(cp, comp_a, comp_b)
    return merged, target


def _valuation(n, q):
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v


def two_generator_decomposition(cp, order_fp):
    """(g2, d2, g1, d1) with ord(g2) = d2 the group exponent, d1*d2 = N_p and
    {g2, g1} generating E(F_p).  For cyclic groups g1 is None and d1 = 1."""
    n = order_fp.n
    if n == 1:
        return None, 1, None, 1
    rng = random.Random(cp.p * 7_777_777 + 13)
    pt = _random_point(cp, rng)
    e = point_order(cp, pt, order_fp)
    stable = 0
    while e < n and stable < 24:
        cand = _random_point(cp, rng)
        merged, new_e = _merge_to_lcm(cp, pt, e, cand, point_order(cp, cand, order_fp))
        stable = stable + 1 if new_e == e else 0
        pt, e = merged, new_e
    if e == n:
        return pt, n, None, 1
    d1 = n // e
    assert e % d1 == 0 and (cp.p - 1) % d1 == 0, "inconsistent structure"
    for _ in range(80):
        cand = _random_point(cp, rng)
        cand_order = point_order(cp, cand, order_fp)
        for j in sorted(d for d in range(1, cand_order + 1) if cand_order % d == 0):
            if discrete_log(cp, pt, scalar_mul_fp(cp, j, cand), e) is not None:
                if j == d1:
                    return pt, e, cand, d1
                break
    raise AssertionError(f"no complementary generator found at p={cp.p}")


def group_structure(cp, order_fp):
    """E(F_p) = Z/d1 x Z/d2 (d1 | d2, d1 | p-1)."""
    n = order_fp.n
    if n == 1:
        return GroupStructureFp(1, 1, (None, None))
    if all(e == 1 for _, e in order_fp.factorization):
        # squarefree abelian group of rank <= 2 is cyclic
        g2, d2, g1, d1 = two_generator_decomposition(cp, order_fp)
        return GroupStructureFp(1, n, (g2, None))
    g2, d2, g1, d1 = two_generator_decomposition(cp, order_fp)
    assert d1 * d2 == n and d2 % d1 == 0 and (cp.p - 1) % d1 == 0
    return GroupStructureFp(d1, d2, (g2, g1))
