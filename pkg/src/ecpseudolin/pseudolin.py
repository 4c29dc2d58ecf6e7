"""Lcm-exponent construction, minimal independent points, and verification.

This is the heart of the package: for a subgroup of rational points it
assembles the integer L_x = lcm{N_p / T_p : p <= x} (bad primes contribute 1
by convention), picks a minimal-Weil-height point independent of the
subgroup, and forms the witness Q_min = L_x * R_min, whose reduction lands
inside the reduced subgroup at every good prime p <= x.  Q_min is kept
symbolic as the pair (L_x, R_min): its canonical height is exactly
L_x^2 * h(R_min) and all mod-p checks reduce L_x modulo the order of the
reduced point first, so its astronomical coordinates are never expanded.
"""

import math
from dataclasses import dataclass

from . import ec_finite as ecf
from . import ec_rational as ecq
from . import heights, reduction
from .errors import (
    NoGoodPrime,
    NotFound,
    PreconditionViolated,
    PrecisionOverflow,
    RankExhausted,
)
from .intervals import Interval, log_of_int
from .nt import sieve_primes

SYMBOLIC_BITS = 4096  # L_x size above which the witness is symbolic-only
EXPLICIT_HEIGHT_BITS = 40_000_000  # guard for materializing Q_min coordinates


@dataclass(frozen=True)
class LcmExponent:
    x: float
    value: int
    per_prime: tuple  # (p, N_p, T_p, N_p // T_p) for every prime p <= x

    @property
    def log_value(self):
        return log_of_int(self.value)


@dataclass(frozen=True)
class PseudoWitness:
    r_min: object
    l_x: LcmExponent
    rmin_height: Interval
    log_qmin_height: Interval  # enclosure of log(L_x^2 * h(R_min))
    symbolic: bool
    translate: object = ecq.INFINITY

    @property
    def qmin_height(self):
        """L_x^2 * h(R_min) as a (possibly float-overflowing) interval."""
        return Interval(
            math.exp(self.log_qmin_height.lo)
            if self.log_qmin_height.lo < 709
            else math.inf,
            math.exp(self.log_qmin_height.hi)
            if self.log_qmin_height.hi < 709
            else math.inf,
        )

    def explicit_point(self, curve):
        """Materialize Q_min = translate + L_x * R_min.  Only sane for small
        L_x; guarded by an estimate of the coordinate size."""
        value = self.l_x.value
        est_bits = 1.45 * value * value * max(self.rmin_height.hi, 0.01)
        if value.bit_length() > SYMBOLIC_BITS or est_bits > EXPLICIT_HEIGHT_BITS:
            raise PrecisionOverflow(
                "explicit coordinates of the witness would be astronomically "
                "large; use the symbolic form"
            )
        q = ecq.scalar_mul(curve, value, self.r_min)
        return ecq.add(curve, self.translate, q)


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    reason: str
    not_in_gamma: bool
    first_failing_prime: object  # int or None
    rows: tuple  # (p, N_p, T_p, member) over good primes, in scan order


@dataclass(frozen=True)
class WitnessSearch:
    prime: object  # int or None
    transcript: tuple  # (p, member) for every good prime scanned


def lcm_exponent(curve, subgroup, x):
    """L_x = lcm{N_p / T_p : p <= x} with the bad-prime convention
    N_p = T_p = 1, plus the per-prime table."""
    if x < 2:
        raise ValueError("x must be at least 2")
    rows = []
    value = 1
    saw_good = False
    for p in sieve_primes(math.floor(x)):
        if curve.disc % p == 0:
            rows.append((p, 1, 1, 1))
            continue
        saw_good = True
        n_p = ecf.group_order(ecf.reduce_curve(curve, p)).n
        t_p = reduction.reduced_subgroup(subgroup, p).order
        assert n_p % t_p == 0, "T_p must divide N_p"
        q = n_p // t_p
        rows.append((p, n_p, t_p, q))
        value = math.lcm(value, q)
    if not saw_good:
        raise NoGoodPrime(f"every prime <= {x} divides the discriminant")
    for _, _, _, q in rows:
        assert value % q == 0
    return LcmExponent(x=float(x), value=value, per_prime=tuple(rows))


def _candidate_points(curve, basis, coeff_bound):
    """Candidates t + sum c_i B_i ordered by (weil height, |c| then sign
    magnitude-first, torsion index); infinity skipped."""
    torsion = ecq.torsion_subgroup(curve).points
    coeff_range = sorted(
        range(-coeff_bound, coeff_bound + 1), key=lambda c: (abs(c), c < 0)
    )
    multiples = []
    for b in basis:
        multiples.append({c: ecq.scalar_mul(curve, c, b) for c in coeff_range})
    out = []
    def rec(idx, acc, coeffs):
        if idx == len(basis):
            for t_idx, t in enumerate(torsion):
                cand = ecq.add(curve, acc, t)
                if cand.is_infinity:
                    continue
                key = tuple((abs(c), c < 0) for c in coeffs)
                out.append(
                    (heights.weil_height_integer(cand), key, t_idx, cand, tuple(coeffs))
                )
            return
        for c in coeff_range:
            rec(idx + 1, ecq.add(curve, acc, multiples[idx][c]), coeffs + [c])
    rec(0, ecq.INFINITY, [])
    out.sort(key=lambda row: row[:3])
    return out


def find_rmin(curve, basis, subgroup, coeff_bound, eps=heights.DEFAULT_EPS):
    """Minimal-Weil-height point in the searched box that is independent of
    the subgroup.  Ties break toward smaller coefficient magnitudes with
    positive coefficients preferred.  The supplied basis is trusted to
    generate the free part of E(Q)."""
    if not basis:
        raise ValueError("basis must contain at least one point")
    if subgroup.rank >= len(basis):
        raise RankExhausted(
            f"subgroup rank {subgroup.rank} >= basis rank {len(basis)}; "
            "no independent point exists"
        )
    if coeff_bound < 1:
        raise ValueError("coeff_bound must be at least 1")
    for cand_h, _, _, cand, _ in _candidate_points(curve, basis, coeff_bound):
        if heights.independent_of(subgroup, cand, eps):
            return cand
    raise NotFound(
        f"no independent candidate with coefficients up to {coeff_bound}"
    )


def construct_qmin(
    curve,
    subgroup,
    x,
    basis,
    coeff_bound=3,
    eps=heights.DEFAULT_EPS,
    translate=ecq.INFINITY,
):
    """The witness pair (L_x, R_min) with its certified height.

    The height identity h(Q_min) = L_x^2 h(R_min) holds for the default
    trivial translate; with a non-trivial translate in the subgroup the log
    height field still records the L_x^2 h(R_min) term (the translate only
    shifts the height by a bounded amount).
    """
    l_x = lcm_exponent(curve, subgroup, x)
    r_min = find_rmin(curve, basis, subgroup, coeff_bound, eps)
    if not translate.is_infinity:
        if heights.gamma_membership(subgroup, translate, eps) is None:
            raise ValueError("translate must belong to the subgroup")
    h_r = heights.canonical_height(curve, r_min, eps)
    if h_r.lo <= 0:
        h_r = heights.canonical_height(curve, r_min, min(eps, h_r.width / 4))
    assert h_r.lo > 0, "independent point must have positive height"
    log_q = Interval.exact(2) * l_x.log_value + Interval(
        math.log(h_r.lo), math.log(h_r.hi)
    )
    log_q = Interval(
        math.nextafter(log_q.lo, -math.inf), math.nextafter(log_q.hi, math.inf)
    )
    return PseudoWitness(
        r_min=r_min,
        l_x=l_x,
        rmin_height=h_r,
        log_qmin_height=log_q,
        symbolic=l_x.value.bit_length() > SYMBOLIC_BITS,
        translate=translate,
    )


def _good_prime_rows(curve, x):
    for p in sieve_primes(math.floor(x)):
        if curve.disc % p != 0:
            yield p


def verify_pseudolinear(curve, subgroup, witness_or_point, x, eps=heights.DEFAULT_EPS):
    """Check the defining property at every good prime p <= x.

    A PseudoWitness is checked symbolically: the scalar L_x is reduced
    modulo the order of the reduced base point before multiplying.  An
    explicit point is first tested for membership over Q, then reduced
    directly.
    """
    rows = []
    if isinstance(witness_or_point, PseudoWitness):
        witness = witness_or_point
        not_in_gamma = True  # L_x >= 1 and <R_min> meets the subgroup trivially
        first_fail = None
        for p in _good_prime_rows(curve, x):
            reduced = reduction.reduced_subgroup(subgroup, p)
            n_p = ecf.group_order(reduced.cp).n
            r_bar = reduction.reduce_point(curve, witness.r_min, p)
            ord_r = ecf.point_order(reduced.cp, r_bar, ecf.group_order(reduced.cp))
            scalar = witness.l_x.value % ord_r
            q_bar = ecf.scalar_mul_fp(reduced.cp, scalar, r_bar)
            if not witness.translate.is_infinity:
                t_bar = reduction.reduce_point(curve, witness.translate, p)
                q_bar = ecf.add_fp(reduced.cp, t_bar, q_bar)
            member = reduced.contains(q_bar)
            rows.append((p, n_p, reduced.order, member))
            if not member and first_fail is None:
                first_fail = p
                break
        passed = not_in_gamma and first_fail is None
        reason = "ok" if passed else f"witness reduction escaped at p={first_fail}"
        return VerificationReport(
            passed=passed,
            reason=reason,
            not_in_gamma=not_in_gamma,
            first_failing_prime=first_fail,
            rows=tuple(rows),
        )
    q = witness_or_point
    if heights.gamma_membership(subgroup, q, eps) is not None:
        return VerificationReport(
            passed=False,
            reason="member of the subgroup over Q",
            not_in_gamma=False,
            first_failing_prime=None,
            rows=(),
        )
    first_fail = None
    for p in _good_prime_rows(curve, x):
        reduced = reduction.reduced_subgroup(subgroup, p)
        n_p = ecf.group_order(reduced.cp).n
        member = reduced.contains(reduction.reduce_point(curve, q, p))
        rows.append((p, n_p, reduced.order, member))
        if not member:
            first_fail = p
            break
    passed = first_fail is None
    reason = "ok" if passed else f"not in the reduced subgroup at p={first_fail}"
    return VerificationReport(
        passed=passed,
        reason=reason,
        not_in_gamma=True,
        first_failing_prime=first_fail,
        rows=tuple(rows),
    )


def find_witness_prime(curve, subgroup, q, p_max):
    """Smallest good prime p <= p_max with q mod p outside the reduced
    subgroup, with the full scan transcript."""
    transcript = []
    found = None
    for p in _good_prime_rows(curve, p_max):
        member = reduction.member_mod_p(subgroup, q, p)
        transcript.append((p, member))
        if not member:
            found = p
            break
    return WitnessSearch(prime=found, transcript=tuple(transcript))


def check_proposition_34(curve, base_point, p, m):
    """Rank-one sanity check: with the full point group generated by
    base_point and m dividing the order of its reduction, no multiple n*P
    with m not dividing n can reduce into the subgroup generated by m*P
    mod p.  Verified by exhausting one period of the reduction."""
    if m < 1:
        raise PreconditionViolated("m must be a positive integer")
    cp = ecf.reduce_curve(curve, p)
    order_fp = ecf.group_order(cp)
    p_bar = reduction.reduce_point(curve, base_point, p)
    period = ecf.point_order(cp, p_bar, order_fp)
    if period % m != 0:
        raise PreconditionViolated(
            f"m={m} does not divide the reduced group order {period}"
        )
    sub = set()
    acc = None
    for _ in range(period // m):
        sub.add(acc)
        acc = ecf.add_fp(cp, acc, ecf.scalar_mul_fp(cp, m, p_bar))
    acc = None
    for n in range(period):
        if n % m != 0 and acc in sub:
            return False
        acc = ecf.add_fp(cp, acc, p_bar)
    return True
