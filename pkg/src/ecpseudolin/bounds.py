"""Leading-term evaluators for the height bounds, and the comparison report.

Every asymptotic bound is exposed with its unknown O(.)/o(1) constants
pinned to zero, so the columns are reference curves rather than certified
inequalities; reports always carry the measured/bound ratios and the
conditional/asymptotic caveats as metadata.  Natural logarithms throughout.
"""

import io
import math
from dataclasses import dataclass

from . import heights, pseudolin

THM14_NOTE = "conditional (GRH); applicable for s >= 19 (non-CM) or s >= 7 (CM)"
THM16_NOTE = "reference curve, not a certified bound (o(1) pinned to 0)"


def bound_trivial(x, error_coeff=0.0):
    """Leading term 2x of the trivial log-height bound.  error_coeff scales
    the error-term shape x*exp(-(log x)^(3/5) (log log x)^(-1/5)) whose true
    constant is not effective; it defaults to 0."""
    if x < 3:
        raise ValueError("x must be at least 3")
    err = 0.0
    if error_coeff:
        lx = math.log(x)
        err = error_coeff * x * math.exp(-(lx ** 0.6) * math.log(lx) ** -0.2)
    return 2.0 * x + err


def bound_thm12(x, gamma_order):
    """Rank-zero upper bound exponent: 2x - 2 log(#Gamma) x/log x."""
    if x < 3:
        raise ValueError("x must be at least 3")
    if gamma_order < 1:
        raise ValueError("gamma_order must be positive")
    return 2.0 * x - 2.0 * math.log(gamma_order) * x / math.log(x)

def bound_thm13(x, s):
    """Positive-rank upper bound exponent: 4x/(s+2)."""
    if s < 1:
        raise ValueError("s must be at least 1")
    return 4.0 * x / (s + 2)


def bound_thm14(x):
    """GRH-conditional upper bound exponent: 4x log log x / log x."""
    if x < 16:
        raise ValueError("x must be at least 16 so that log log x > 0")
    return 4.0 * x * math.log(math.log(x)) / math.log(x)


def lower_thm15(x, gamma_order):
    """Rank-zero lower bound on the height value itself: x/(#Gamma log x)."""
    if x < 3:
        raise ValueError("x must be at least 3")
    if gamma_order < 1:
        raise ValueError("gamma_order must be positive")
    return x / (gamma_order * math.log(x))


def lower_thm16(x, s, grh=False):
    """Free-subgroup lower bound: exp((log x)^(1/(2s+6))) unconditionally,
    exp(x^(1/(4s+12))) under GRH."""
    if s < 1:
        raise ValueError("s must be at least 1")
    if grh:
        return math.exp(x ** (1.0 / (4 * s + 12)))
    return math.exp(math.log(x) ** (1.0 / (2 * s + 6)))


@dataclass(frozen=True)
class BoundRow:
    x: float
    log_lx: float
    log_qmin_lo: float
    log_qmin_hi: float
    trivial: float
    thm12: object  # float when s = 0, else None
    thm13: object  # float when s >= 1, else None
    thm14: float
    lower15: object  # float when s = 0, else None
    lower16_uncond: object  # float when s >= 1 and Gamma free, else None
    lower16_grh: object
    ratio_to_x: float
    ratio_to_trivial: float


@dataclass(frozen=True)
class BoundReport:
    rows: tuple
    s: int
    gamma_order: int
    notes: tuple

    CSV_COLUMNS = (
        "x", "log_lx", "log_qmin_lo", "log_qmin_hi", "trivial", "thm12",
        "thm13", "thm14", "lower15", "lower16_uncond", "lower16_grh",
        "ratio_to_x", "ratio_to_trivial",
    )

    def to_csv(self):
        out = io.StringIO()
        out.write(",".join(self.CSV_COLUMNS) + "\n")
        for row in self.rows:
            cells = [
                _fmt(getattr(row, col)) for col in self.CSV_COLUMNS
            ]
            out.write(",".join(cells) + "\n")
        return out.getvalue()


def _fmt(v):
    if v is None:
        return "na"
    return format(float(v), ".12g")


def compare_report(
    curve, subgroup, basis, x_grid, coeff_bound=3, eps=heights.DEFAULT_EPS
):
    """One witness construction per grid point, with every bound column.

    Theorem columns that do not apply to the subgroup's rank are reported
    as missing rather than extrapolated.
    """
    s = subgroup.rank
    gamma_order = subgroup.torsion_order()
    rows = []
    for x in sorted(x_grid):
        witness = pseudolin.construct_qmin(
            curve, subgroup, x, basis, coeff_bound=coeff_bound, eps=eps
        )
        log_q = witness.log_qmin_height
        measured = log_q.mid
        trivial = bound_trivial(x)
        row = BoundRow(
            x=float(x),
            log_lx=witness.l_x.log_value.mid,
            log_qmin_lo=log_q.lo,
            log_qmin_hi=log_q.hi,
            trivial=trivial,
            thm12=bound_thm12(x, gamma_order) if s == 0 else None,
            thm13=bound_thm13(x, s) if s >= 1 else None,
            thm14=bound_thm14(x) if x >= 16 else None,
            lower15=lower_thm15(x, gamma_order) if s == 0 else None,
            lower16_uncond=lower_thm16(x, s) if s >= 1 and gamma_order == 1 else None,
            lower16_grh=lower_thm16(x, s, grh=True)
            if s >= 1 and gamma_order == 1
            else None,
            ratio_to_x=measured / x,
            ratio_to_trivial=measured / trivial,
        )
        rows.append(row)
    return BoundReport(
        rows=tuple(rows),
        s=s,
        gamma_order=gamma_order,
        notes=(THM14_NOTE, THM16_NOTE),
    )
