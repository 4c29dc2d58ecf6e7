"""Pseudolinearly dependent points on elliptic curves over Q.

Construct witnesses Q_min = L_x * R_min whose reductions land inside a
subgroup's image at every good prime p <= x, verify the defining property,
search for witness primes, and compare certified heights against the
theoretical upper and lower bounds.
"""

from .bounds import (
    BoundReport,
    bound_thm12,
    bound_thm13,
    bound_thm14,
    bound_trivial,
    compare_report,
    lower_thm15,
    lower_thm16,
)
from .ec_finite import (
    CurveFp,
    GroupOrderFp,
    GroupStructureFp,
    discrete_log,
    group_order,
    group_structure,
    reduce_curve,
)
from .ec_rational import (
    INFINITY,
    CurveQ,
    PointQ,
    TorsionGroup,
    add,
    canonical_form,
    is_good_reduction,
    negate,
    on_curve,
    parse_curve,
    point,
    scalar_mul,
    torsion_subgroup,
)
from .errors import (
    BadReduction,
    ECPseudolinError,
    InconclusivePrecision,
    InfinityPoint,
    NoGoodPrime,
    NotFound,
    ParseError,
    PrecisionOverflow,
    PreconditionViolated,
    RankExhausted,
    SingularCurve,
)
from .heights import (
    canonical_height,
    gamma_membership,
    height_pairing,
    independent_of,
    weil_height,
    weil_height_integer,
)
from .intervals import Interval
from .pseudolin import (
    LcmExponent,
    PseudoWitness,
    VerificationReport,
    check_proposition_34,
    construct_qmin,
    find_rmin,
    find_witness_prime,
    lcm_exponent,
    verify_pseudolinear,
)
from .reduction import (
    ReducedSubgroup,
    Subgroup,
    make_subgroup,
    member_mod_p,
    reduce_point,
    reduced_subgroup,
    trivial_subgroup,
)

__version__ = "0.1.0"
