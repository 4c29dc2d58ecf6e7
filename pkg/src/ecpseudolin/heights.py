"""Weil and canonical heights, height pairing, membership and independence.

The canonical height is the doubling limit h_weil(2^n P)/4^n.  Its tail is
certified by a per-curve one-step constant pair derived from the duplication
forms: writing x = a/b in lowest terms, x(2P) = F(a,b)/G(a,b) for explicit
homogeneous quartics, and

    h_weil(2P) <= 4*h_weil(P) + log(C1)   (coefficient-sum bound)
    h_weil(2P) >= 4*h_weil(P) - log(C2)   (resultant-cofactor bound)

so the limit lies within [-log(C2)/3, +log(C1)/3] / 4^n of h_weil(2^n P)/4^n.
The cofactor identities U*F + V*G = R_a * a^7 (and the b-side analogue) are
derived once per curve and verified symbolically; they also bound the
spurious gcd of (F(a,b), G(a,b)) by T = |R_a*R_b|, so the orbit can strip
common factors with small modular bookkeeping instead of full bignum gcds.

The orbit itself runs in directed-rounding MPFR interval arithmetic with an
exact power-of-two scale carried in a Python integer, so coordinates of
astronomical height never materialize.  An exact big-integer mode backs it
up and doubles as an independent oracle in the tests.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
from gmpy2 import mpz

from . import ec_rational as ecq
from .errors import InconclusivePrecision, PrecisionOverflow
from .intervals import Interval, det, log_of_int, log_of_rational, solve

DEFAULT_EPS = 1e-8
MIN_EPS = 1e-12
MAX_DOUBLINGS = 26
EXACT_BIT_BUDGET = 48_000_000
# This MPFR build caps exponents near +-2^30; mantissas are renormalized
# jointly each step and components below 2^-FLUSH_BITS are widened to a
# symmetric enclosure of that radius, keeping every exponent in range.
FLUSH_BITS = 400_000_000

_LN2 = Interval(0.6931471805599452, 0.6931471805599454)


class _PrecisionStall(Exception):
    """Internal: interval orbit lost too much precision; retry or fall back."""


# ---------------------------------------------------------------------------
# Per-curve duplication data


@dataclass(frozen=True)
class HeightEngine:
    curve: object
    f_coeffs: tuple  # F(a,b) = sum f_i a^(4-i) b^i
    g_coeffs: tuple  # G(a,b) = sum g_i a^(4-i) b^i
    strip_t: int  # gcd(F(a,b), G(a,b)) divides this for coprime (a,b)
    log_c1: float  # upper one-step constant, rounded up
    log_c2: float  # lower one-step constant, rounded up

    @property
    def tail_up(self):
        return self.log_c1 / 3.0

    @property
    def tail_down(self):
        return self.log_c2 / 3.0

    @property
    def difference_bound(self):
        """|canonical - weil| <= this, for every rational point."""
        return max(self.tail_up, self.tail_down)


def _duplication_forms(curve):
    b2, b4, b6, b8 = curve.b2, curve.b4, curve.b6, curve.b8
    f = (1, 0, -b4, -2 * b6, -b8)
    g = (0, 4, b2, 2 * b4, b6)
    return f, g


def _cofactor_identity(f_coeffs, g_coeffs, side):
    """Integer cofactor data (u, v, r): homogeneous cubics with
    u*F + v*G = r * a^7 (side="a") or r * b^7 (side="b").  The cubics are
    returned as coefficient tuples (c_0..c_3) meaning sum c_j a^(3-j) b^j.
    """
    import sympy

    t = sympy.symbols("t")
    if side == "b":
        # dehomogenize at b=1: u(t) f(t) + v(t) g(t) = r, t = a/b
        fp = sympy.Poly(
            sum(c * t ** (4 - i) for i, c in enumerate(f_coeffs)), t, domain="QQ"
        )
        gp = sympy.Poly(
            sum(c * t ** (4 - i) for i, c in enumerate(g_coeffs)), t, domain="QQ"
        )
    else:
        # dehomogenize at a=1: t = b/a
        fp = sympy.Poly(
            sum(c * t ** i for i, c in enumerate(f_coeffs)), t, domain="QQ"
        )
        gp = sympy.Poly(
            sum(c * t ** i for i, c in enumerate(g_coeffs)), t, domain="QQ"
        )
    u, v, h = fp.gcdex(gp)
    if h.degree() != 0:
        raise ValueError("duplication forms share a factor; curve is singular")
    u, v = u.quo(h), v.quo(h)
    denom = int(
        sympy.lcm([c.q for c in u.all_coeffs()] + [c.q for c in v.all_coeffs()])
    )
    ucs = [int(c * denom) for c in u.all_coeffs()]
    vcs = [int(c * denom) for c in v.all_coeffs()]
    r = denom
    content = math.gcd(r, math.gcd(*(ucs + vcs + [0])))
    ucs = [c // content for c in ucs]
    vcs = [c // content for c in vcs]
    r //= content
    assert len(ucs) <= 4 and len(vcs) <= 4, "cofactor degree exceeds 3"
    # all_coeffs is highest-degree-first; pad to degree 3
    ucs = [0] * (4 - len(ucs)) + ucs
    vcs = [0] * (4 - len(vcs)) + vcs
    if side == "b":
        # u(t) = sum ucs[j] t^(3-j); b^3 u(a/b) = sum ucs[j] a^(3-j) b^j
        u_hom, v_hom = tuple(ucs), tuple(vcs)
    else:
        # u(t) = sum ucs[j] t^(3-j); a^3 u(b/a) = sum ucs[j] b^(3-j) a^j
        u_hom, v_hom = tuple(reversed(ucs)), tuple(reversed(vcs))
    _verify_cofactor_identity(f_coeffs, g_coeffs, u_hom, v_hom, r, side)
    return u_hom, v_hom, r


def _verify_cofactor_identity(f_coeffs, g_coeffs, u_hom, v_hom, r, side):
    import sympy

    a, b = sympy.symbols("a b")
    F = sum(c * a ** (4 - i) * b ** i for i, c in enumerate(f_coeffs))
    G = sum(c * a ** (4 - i) * b ** i for i, c in enumerate(g_coeffs))
    U = sum(c * a ** (3 - j) * b ** j for j, c in enumerate(u_hom))
    V = sum(c * a ** (3 - j) * b ** j for j, c in enumerate(v_hom))
    target = r * (b ** 7 if side == "b" else a ** 7)
    assert sympy.expand(U * F + V * G - target) == 0, "cofactor identity failed"


@lru_cache(maxsize=None)
def height_engine(curve):
    f, g = _duplication_forms(curve)
    c1 = max(sum(abs(c) for c in f), sum(abs(c) for c in g))
    ua, va, ra = _cofactor_identity(f, g, "a")
    ub, vb, rb = _cofactor_identity(f, g, "b")
    sa = sum(abs(c) for c in ua) + sum(abs(c) for c in va)
    sb = sum(abs(c) for c in ub) + sum(abs(c) for c in vb)
    strip_t = abs(ra * rb)
    # C2 = T * max(S_a/|R_a|, S_b/|R_b|), kept exact until the final log
    c2_num = strip_t * max(sa * abs(rb), sb * abs(ra))
    c2_den = abs(ra) * abs(rb)
    log_c1 = log_of_int(c1).hi
    log_c2 = max(log_of_rational(c2_num, c2_den).hi, 0.0)
    return HeightEngine(
        curve=curve,
        f_coeffs=tuple(int(c) for c in f),
        g_coeffs=tuple(int(c) for c in g),
        strip_t=strip_t,
        log_c1=log_c1,
        log_c2=log_c2,
    )


# ---------------------------------------------------------------------------
# Weil height


def weil_height_integer(p):
    """H(P) = max(|a|, |b|) for x(P) = a/b in lowest terms (1 for infinity)."""
    if p.is_infinity:
        return 1
    return max(abs(p.x.numerator), p.x.denominator)


def weil_height(p):
    """log max(|a|,|b|); exactly the log of weil_height_integer(p)."""
    return math.log(weil_height_integer(p))


# ---------------------------------------------------------------------------
# Canonical height: interval-orbit mode

# intervals are (lo, hi) mpfr pairs manipulated through an _Arith instance,
# which owns one rounding-down and one rounding-up context


class _Arith:
    def __init__(self, prec):
        self.dn = gmpy2.context(precision=prec, round=gmpy2.RoundDown)
        self.up = gmpy2.context(precision=prec, round=gmpy2.RoundUp)
        self.one = gmpy2.mpfr(1)

    def from_int(self, n):
        n = mpz(n)
        return (self.dn.mul(n, self.one), self.up.mul(n, self.one))

    def add(self, x, y):
        return (self.dn.add(x[0], y[0]), self.up.add(x[1], y[1]))

    def mul(self, x, y):
        los = (
            self.dn.mul(x[0], y[0]),
            self.dn.mul(x[0], y[1]),
            self.dn.mul(x[1], y[0]),
            self.dn.mul(x[1], y[1]),
        )
        his = (
            self.up.mul(x[0], y[0]),
            self.up.mul(x[0], y[1]),
            self.up.mul(x[1], y[0]),
            self.up.mul(x[1], y[1]),
        )
        return (min(los), max(his))

    def mul_int(self, x, c):
        c = mpz(c)
        if c >= 0:
            return (self.dn.mul(x[0], c), self.up.mul(x[1], c))
        return (self.dn.mul(x[1], c), self.up.mul(x[0], c))

    def div_posint(self, x, c):
        c = mpz(c)
        return (self.dn.div(x[0], c), self.up.div(x[1], c))

    def scale2(self, x, k):
        if k >= 0:
            return (self.dn.mul_2exp(x[0], k), self.up.mul_2exp(x[1], k))
        return (self.dn.div_2exp(x[0], -k), self.up.div_2exp(x[1], -k))

    @staticmethod
    def abs_bounds(x):
        lo, hi = x
        lo_abs = 0 if lo <= 0 <= hi else min(abs(lo), abs(hi))
        return lo_abs, max(abs(lo), abs(hi))

    @staticmethod
    def max_exp(x):
        m = max(abs(x[0]), abs(x[1]))
        return gmpy2.get_exp(m) if m != 0 else None

    def width_small_enough(self, x, dominant_hi):
        w = self.up.sub(x[1], x[0])
        return w <= self.up.div_2exp(dominant_hi, 64)


def _form_eval_iv(ar, coeffs, pows):
    acc = None
    for c, mono in zip(coeffs, pows):
        if c == 0:
            continue
        term = ar.mul_int(mono, c)
        acc = term if acc is None else ar.add(acc, term)
    return acc


def _form_eval_mod(coeffs, ra, rb, modulus):
    acc = 0
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        acc += c * pow(ra, 4 - i, modulus) * pow(rb, i, modulus)
    return acc % modulus


def _interval_orbit(engine, m, ksq, n, prec):
    """Certified enclosure of log max(|a_n|, |b_n|) for the reduced doubling
    orbit starting at (m, k^2), as an Interval of floats.

    Raises _PrecisionStall when cancellation outruns the working precision.
    """
    ar = _Arith(prec)
    t_strip = engine.strip_t
    track_mod = t_strip ** (n + 2) if t_strip > 1 else None
    ra, rb = (m % track_mod, ksq % track_mod) if track_mod else (None, None)
    a, b = ar.from_int(m), ar.from_int(ksq)
    sigma = 0
    tiny_lo = ar.dn.div_2exp(ar.one, FLUSH_BITS)
    tiny_hi = ar.up.div_2exp(ar.one, FLUSH_BITS)
    for step in range(n):
        ab = ar.mul(a, b)
        a2, b2 = ar.mul(a, a), ar.mul(b, b)
        pows = (
            ar.mul(a2, a2),
            ar.mul(a2, ab),
            ar.mul(ab, ab),
            ar.mul(ab, b2),
            ar.mul(b2, b2),
        )
        new_a = _form_eval_iv(ar, engine.f_coeffs, pows)
        new_b = _form_eval_iv(ar, engine.g_coeffs, pows)
        if track_mod:
            next_mod = track_mod // t_strip
            na = _form_eval_mod(engine.f_coeffs, ra, rb, track_mod)
            nb = _form_eval_mod(engine.g_coeffs, ra, rb, track_mod)
            d = math.gcd(math.gcd(na, t_strip), math.gcd(nb, t_strip))
            if d > 1:
                new_a = ar.div_posint(new_a, d)
                new_b = ar.div_posint(new_b, d)
            ra, rb = (na // d) % next_mod, (nb // d) % next_mod
            track_mod = next_mod
        a, b = new_a, new_b
        exps = [e for e in (ar.max_exp(a), ar.max_exp(b)) if e is not None]
        if not exps:
            raise _PrecisionStall("orbit collapsed to zero enclosures")
        shift = max(exps)
        a, b = ar.scale2(a, -shift), ar.scale2(b, -shift)
        sigma = 4 * sigma + shift
        if ar.abs_bounds(a)[1] < tiny_lo:
            a = (-tiny_hi, tiny_hi)
        if ar.abs_bounds(b)[1] < tiny_lo:
            b = (-tiny_hi, tiny_hi)
        dominant = max(ar.abs_bounds(a)[1], ar.abs_bounds(b)[1])
        if not (
            ar.width_small_enough(a, dominant) and ar.width_small_enough(b, dominant)
        ):
            raise _PrecisionStall(f"precision loss at doubling step {step}")
    lo = max(ar.abs_bounds(a)[0], ar.abs_bounds(b)[0])
    hi = max(ar.abs_bounds(a)[1], ar.abs_bounds(b)[1])
    if lo <= 0:
        raise _PrecisionStall("magnitude enclosure not positive")
    ln_lo = math.nextafter(float(ar.dn.log(lo)), -math.inf)
    ln_hi = math.nextafter(float(ar.up.log(hi)), math.inf)
    return Interval(ln_lo, ln_hi) + Interval.exact(sigma) * _LN2


# ---------------------------------------------------------------------------
# Canonical height: exact big-integer mode


def _exact_orbit(engine, m, ksq, n, bit_budget):
    """log max(|a_n|, |b_n|) via exact integers, or None when the orbit hits
    infinity (torsion).  The strip constant keeps reductions cheap."""
    t_strip = mpz(engine.strip_t)
    fc = tuple(mpz(c) for c in engine.f_coeffs)
    gc = tuple(mpz(c) for c in engine.g_coeffs)
    a, b = mpz(m), mpz(ksq)
    for _ in range(n):
        if max(a.bit_length(), b.bit_length()) * 4 > bit_budget:
            raise PrecisionOverflow(
                f"exact doubling would exceed the {bit_budget}-bit budget"
            )
        ab, a2, b2 = a * b, a * a, b * b
        pows = (a2 * a2, a2 * ab, ab * ab, ab * b2, b2 * b2)
        new_a = sum(c * pw for c, pw in zip(fc, pows) if c != 0)
        new_b = sum(c * pw for c, pw in zip(gc, pows) if c != 0)
        if new_b == 0:
            return None
        d = gmpy2.gcd(gmpy2.gcd(new_a, t_strip), gmpy2.gcd(new_b, t_strip))
        a, b = new_a // d, new_b // d
    return log_of_int(max(abs(a), abs(b)))


# ---------------------------------------------------------------------------
# Public height API


def _tail_doublings(engine, eps):
    budget = 0.9 * eps
    need = (engine.tail_up + engine.tail_down) / budget
    n = max(1, math.ceil(math.log(need, 4.0))) if need > 1 else 1
    if n > MAX_DOUBLINGS:
        raise PrecisionOverflow(
            f"eps={eps} needs {n} doublings; limit is {MAX_DOUBLINGS}"
        )
    return n


@lru_cache(maxsize=100_000)
def _canonical_height_cached(curve, p, eps, mode):
    if p.is_infinity:
        return Interval.zero()
    engine = height_engine(curve)
    # a torsion point has weil height at most the difference bound, so the
    # exact small-order scan is only needed for points below it
    if weil_height(p) <= engine.tail_down + 0.5 and ecq.point_order(curve, p):
        return Interval.zero()
    m, _, k = p.canonical
    n = _tail_doublings(engine, eps)
    ln_iv = None
    if mode == "interval":
        prec = 384
        while prec <= 12288 and ln_iv is None:
            try:
                ln_iv = _interval_orbit(engine, m, k * k, n, prec)
            except _PrecisionStall:
                prec *= 2
    if ln_iv is None:
        ln_iv = _exact_orbit(engine, m, k * k, n, EXACT_BIT_BUDGET)
        if ln_iv is None:
            return Interval.zero()  # exact orbit found infinity: torsion
    scale = math.ldexp(1.0, -2 * n)  # exact power-of-two float scaling
    result = Interval(ln_iv.lo * scale, ln_iv.hi * scale) + Interval(
        -engine.tail_down * scale, engine.tail_up * scale
    )
    assert result.width <= eps * 1.01, "height interval wider than requested"
    return result


def canonical_height(curve, p, eps=DEFAULT_EPS, mode="interval"):
    """Certified enclosure of the canonical height (doubling-limit
    normalization, natural logs).  Width at most eps.

    mode="exact" forces the big-integer orbit; it is the independent oracle
    the interval mode is tested against.
    """
    if not eps or eps < MIN_EPS:
        raise ValueError(f"eps must be at least {MIN_EPS}")
    if mode not in ("interval", "exact"):
        raise ValueError(f"unknown mode {mode!r}")
    if not ecq.on_curve(curve, p):
        raise ValueError("point is not on the curve")
    return _canonical_height_cached(curve, p, float(eps), mode)


def height_pairing(curve, p, q, eps=DEFAULT_EPS):
    """Certified enclosure of <P,Q> = (h(P+Q) - h(P) - h(Q)) / 2."""
    if p.is_infinity or q.is_infinity:
        return Interval.zero()
    sub_eps = eps / 2.0
    h_sum = canonical_height(curve, ecq.add(curve, p, q), sub_eps)
    h_p = canonical_height(curve, p, sub_eps)
    h_q = canonical_height(curve, q, sub_eps)
    return (h_sum - h_p - h_q) * Interval.exact(0.5)


def gram_matrix(curve, points, eps=DEFAULT_EPS):
    n = len(points)
    mat = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            if i == j:
                mat[i][i] = canonical_height(curve, points[i], eps)
            else:
                mat[i][j] = mat[j][i] = height_pairing(
                    curve, points[i], points[j], eps
                )
    return mat


# ---------------------------------------------------------------------------
# Membership and independence over Q


def _integer_candidates(iv):
    return list(range(math.ceil(iv.lo), math.floor(iv.hi) + 1))


def _solve_coefficients(curve, gens, q, eps):
    mat = gram_matrix(curve, gens, eps)
    rhs = [height_pairing(curve, q, g, eps) for g in gens]
    return solve(mat, rhs)


def gamma_membership(subgroup, q, eps=DEFAULT_EPS):
    """If q lies in the subgroup, return (coefficients, torsion_part) with
    q = torsion_part + sum c_i * P_i verified exactly; otherwise None.

    The interval Gram solve only proposes integer coefficients; exact point
    arithmetic is the arbiter.  Raises InconclusivePrecision when intervals
    cannot pin a unique candidate at the precision floor.
    """
    curve = subgroup.curve
    if not ecq.on_curve(curve, q):
        raise ValueError("point is not on the curve")
    gens = subgroup.free_gens
    torsion = subgroup.torsion_elements
    if not gens:
        return ((), q) if q in torsion else None
    cur_eps = max(eps, 1e-5)
    while True:
        try:
            coeffs = _solve_coefficients(curve, gens, q, cur_eps)
        except ZeroDivisionError:
            coeffs = None
        if coeffs is not None:
            cands = [_integer_candidates(iv) for iv in coeffs]
            if any(len(c) == 0 for c in cands):
                return None  # certified: the real solution is not integral
            if all(len(c) == 1 for c in cands) and all(
                abs(iv.mid - c[0]) <= 1e-3 for iv, c in zip(coeffs, cands)
            ):
                vec = tuple(c[0] for c in cands)
                residue = q
                for c, g in zip(vec, gens):
                    residue = ecq.add(curve, residue, ecq.scalar_mul(curve, -c, g))
                if residue in torsion:
                    return (vec, residue)
                return None  # certified: the unique candidate fails exactly
        if cur_eps <= eps:
            raise InconclusivePrecision(
                "Gram solve cannot isolate integer coefficients at the "
                "precision floor"
            )
        cur_eps = max(eps, cur_eps / 4.0)


def independent_of(subgroup, r, eps=DEFAULT_EPS):
    """True iff <r> meets the subgroup only at infinity, certified.

    Combines an exact small-order scan (the Mazur cap certifies non-torsion),
    exact membership checks of small multiples of r (their pairing solves are
    the base solve scaled by m), and a certified-positive Gram determinant
    for the extended generator list.
    """
    curve = subgroup.curve
    if r.is_infinity or ecq.point_order(curve, r) is not None:
        return False
    gens = subgroup.free_gens
    if not gens:
        return True  # certified non-torsion point vs a torsion subgroup
    cur_eps = max(eps, 1e-5)
    while True:
        decided = _independence_round(subgroup, r, cur_eps)
        if decided is not None:
            return decided
        if cur_eps <= eps:
            raise InconclusivePrecision(
                "cannot certify independence at the precision floor"
            )
        cur_eps = max(eps, cur_eps / 4.0)


def _independence_round(subgroup, r, eps):
    curve = subgroup.curve
    gens = subgroup.free_gens
    try:
        base = _solve_coefficients(curve, gens, r, eps)
    except ZeroDivisionError:
        return None
    for m in range(1, ecq.MAZUR_ORDER_CAP + 1):
        scaled = [iv * Interval.exact(m) for iv in base]
        cands = [_integer_candidates(iv) for iv in scaled]
        if any(len(c) == 0 for c in cands):
            continue  # m*r certainly outside the free lattice
        if any(len(c) > 1 for c in cands):
            return None  # not tight enough; caller refines
        vec = tuple(c[0] for c in cands)
        residue = ecq.scalar_mul(curve, m, r)
        for c, g in zip(vec, gens):
            residue = ecq.add(curve, residue, ecq.scalar_mul(curve, -c, g))
        if residue in subgroup.torsion_elements:
            return False
    d = det(gram_matrix(curve, list(gens) + [r], eps))
    if d.lo > 0 and d.lo >= 10.0 * d.width:
        return True
    return None


def certified_positive_regulator(curve, points, eps=DEFAULT_EPS):
    """Gram determinant interval for the points, raising
    InconclusivePrecision unless it is positive with a 10x width margin."""
    cur_eps = max(eps, 1e-5)
    while True:
        d = det(gram_matrix(curve, points, cur_eps))
        if d.lo > 0 and d.lo >= 10.0 * d.width:
            return d
        if cur_eps <= eps:
            raise InconclusivePrecision("Gram determinant not certified positive")
        cur_eps = max(eps, cur_eps / 4.0)
