"""Reduction E(Q) -> E(F_p): kernel detection, reduced subgroups, membership.

A Subgroup is given by generators (torsion and infinite-order).  Its image
mod p is computed by one of three strategies, chosen by group size: exhaustive
closure (the correctness oracle, N_p <= 5000), discrete logs against a cyclic
generator, or coordinates relative to a certified two-generator decomposition
with a 2x2 integer lattice (Hermite form) for membership.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

from . import ec_finite as ecf
from . import ec_rational as ecq
from . import heights
from .errors import BadReduction

CLOSURE_THRESHOLD = 5000


# ---------------------------------------------------------------------------
# Subgroups of E(Q)


@dataclass(frozen=True)
class Subgroup:
    curve: object
    free_gens: tuple
    torsion_gens: tuple

    @property
    def rank(self):
        return len(self.free_gens)

    @property
    def torsion_elements(self):
        """All elements of the torsion part (closure of the torsion
        generators), infinity included."""
        return _torsion_closure(self.curve, self.torsion_gens)

    def torsion_order(self):
        return len(self.torsion_elements)


@lru_cache(maxsize=None)
def _torsion_closure(curve, torsion_gens):
    elements = {ecq.INFINITY}
    for g in torsion_gens:
        order = ecq.point_order(curve, g)
        assert order is not None
        new = set()
        for h in elements:
            acc = h
            for _ in range(order):
                new.add(acc)
                acc = ecq.add(curve, acc, g)
        elements = new
    return tuple(
        sorted(elements, key=lambda p: (not p.is_infinity, p.x or 0, p.y or 0))
    )


def make_subgroup(curve, free_gens=(), torsion_gens=(), eps=heights.DEFAULT_EPS):
    """Validated subgroup: every generator on the curve, torsion generators
    of verified finite order, free generators certified non-torsion (Mazur
    cap scan) and independent (positive Gram determinant when rank >= 2)."""
    free_gens = tuple(free_gens)
    torsion_gens = tuple(torsion_gens)
    for g in free_gens + torsion_gens:
        if not ecq.on_curve(curve, g):
            raise ValueError(f"generator {g} is not on the curve")
    for g in torsion_gens:
        if ecq.point_order(curve, g) is None:
            raise ValueError(f"torsion generator {g} does not have finite order")
    for g in free_gens:
        if g.is_infinity or ecq.point_order(curve, g) is not None:
            raise ValueError(f"free generator {g} is a torsion point")
    if len(free_gens) >= 2:
        heights.certified_positive_regulator(curve, list(free_gens), eps)
    return Subgroup(curve=curve, free_gens=free_gens, torsion_gens=torsion_gens)


def trivial_subgroup(curve):
    return Subgroup(curve=curve, free_gens=(), torsion_gens=())


# ---------------------------------------------------------------------------
# The reduction map


def reduce_point(curve, point, prime):
    """Image of a rational point in E(F_prime); infinity iff prime | k in
    the canonical (m/k^2, n/k^3) form."""
    if curve.disc % prime == 0:
        raise BadReduction(f"prime {prime} divides the discriminant")
    if point.is_infinity:
        return None
    m, n, k = point.canonical
    if k % prime == 0:
        return None
    inv = pow(k, -1, prime)
    inv2 = inv * inv % prime
    return (m * inv2 % prime, n * inv2 * inv % prime)


# ---------------------------------------------------------------------------
# Reduced subgroups


@dataclass(frozen=True)
class ReducedSubgroup:
    prime: int
    cp: object
    gens: tuple  # reduced generators (PointFp)
    order: int  # T_p
    strategy: str  # "closure" | "cyclic" | "two-generator"
    membership: object = field(compare=False)  # PointFp -> bool

    def contains(self, pt):
        if not ecf.on_curve_fp(self.cp, pt):
            raise ValueError("point is not on the reduced curve")
        return self.membership(pt)


def _closure_of(cp, gens, order_fp):
    elements = {None}
    for g in gens:
        g_order = ecf.point_order(cp, g, order_fp)
        new = set()
        for h in elements:
            acc = h
            for _ in range(g_order):
                new.add(acc)
                acc = ecf.add_fp(cp, acc, g)
        elements = new
    return elements


def _hnf_2d(rows):
    """Hermite form of the lattice spanned by integer 2-vectors; returns
    ((h00, 0), (h10, h11)) with h00, h11 > 0."""
    rows = [list(r) for r in rows if r != (0, 0)]
    # clear the second coordinate of all but one row via gcd steps
    while True:
        nz = [r for r in rows if r[1] != 0]
        if len(nz) <= 1:
            break
        nz.sort(key=lambda r: abs(r[1]))
        a, b = nz[0], nz[1]
        q = b[1] // a[1]
        b[0] -= q * a[0]
        b[1] -= q * a[1]
        rows = [r for r in rows if r != [0, 0]]
    pivot = next((r for r in rows if r[1] != 0), None)
    rest = [r[0] for r in rows if r[1] == 0]
    h00 = math.gcd(*(rest + [0]))
    assert h00 > 0 and pivot is not None, "degenerate lattice"
    h10, h11 = pivot
    if h11 < 0:
        h10, h11 = -h10, -h11
    h10 %= h00 if h00 else 1
    return ((h00, 0), (h10, h11))


def _lattice_contains(hnf, v):
    (h00, _), (h10, h11) = hnf
    v0, v1 = v
    if v1 % h11 != 0:
        return False
    y = v1 // h11
    return (v0 - y * h10) % h00 == 0


def _two_gen_coords(cp, pt, g2, e, g1, d1):
    """(i, j) with pt = i*g2 + j*g1, j in [0, d1)."""
    for j in range(d1):
        shifted = ecf.add_fp(cp, pt, ecf.negate_fp(cp, ecf.scalar_mul_fp(cp, j, g1)))
        i = ecf.discrete_log(cp, g2, shifted, e)
        if i is not None:
            return (i, j)
    raise AssertionError("point has no coordinates in the decomposition")


@lru_cache(maxsize=None)
def reduced_subgroup(subgroup, prime):
    """Gamma_p with its order T_p and a membership test."""
    curve = subgroup.curve
    cp = ecf.reduce_curve(curve, prime)
    gens = tuple(
        reduce_point(curve, g, prime)
        for g in subgroup.free_gens + subgroup.torsion_gens
    )
    order_fp = ecf.group_order(cp)
    n = order_fp.n
    if n <= CLOSURE_THRESHOLD:
        elements = frozenset(_closure_of(cp, gens, order_fp))
        return ReducedSubgroup(
            prime=prime,
            cp=cp,
            gens=gens,
            order=len(elements),
            strategy="closure",
            membership=elements.__contains__,
        )
    g2, e, g1, d1 = ecf.two_generator_decomposition(cp, order_fp)
    if d1 == 1:
        logs = [ecf.discrete_log(cp, g2, g, n) for g in gens]
        assert all(x is not None for x in logs), "generator outside cyclic group"
        stride = math.gcd(n, *logs) if logs else n
        t_p = n // stride

        def member(pt, _cp=cp, _g2=g2, _n=n, _stride=stride):
            x = ecf.discrete_log(_cp, _g2, pt, _n)
            return x is not None and x % _stride == 0

        return ReducedSubgroup(
            prime=prime, cp=cp, gens=gens, order=t_p,
            strategy="cyclic", membership=member,
        )
    # relations: e*g2 = O and d1*g1 = c*g2
    c = ecf.discrete_log(cp, g2, ecf.scalar_mul_fp(cp, d1, g1), e)
    assert c is not None, "decomposition index is wrong"
    rows = [(e, 0), (-c, d1)]
    rows += [_two_gen_coords(cp, g, g2, e, g1, d1) for g in gens]
    hnf = _hnf_2d(rows)
    covolume = hnf[0][0] * hnf[1][1]
    t_p = (e * d1) // covolume
    assert (e * d1) % covolume == 0

    def member(pt, _cp=cp, _hnf=hnf, _args=(g2, e, g1, d1)):
        coords = _two_gen_coords(_cp, pt, *_args)
        return _lattice_contains(_hnf, coords)

    return ReducedSubgroup(
        prime=prime, cp=cp, gens=gens, order=t_p,
        strategy="two-generator", membership=member,
    )


def member_mod_p(subgroup, q, prime):
    """True iff q mod prime lies in Gamma_p."""
    reduced = reduced_subgroup(subgroup, prime)
    q_bar = reduce_point(subgroup.curve, q, prime)
    return reduced.contains(q_bar)
