"""Exception types shared across the package."""


class ECPseudolinError(Exception):
    """Base class for all domain errors raised by this package."""


class SingularCurve(ECPseudolinError):
    """The Weierstrass coefficients describe a singular curve (discriminant 0)."""


class BadReduction(ECPseudolinError):
    """Operation requested at a prime dividing the curve discriminant."""


class InfinityPoint(ECPseudolinError):
    """Affine-only operation applied to the point at infinity."""


class PrecisionOverflow(ECPseudolinError):
    """Certified height computation would exceed the configured bit budget."""


class InconclusivePrecision(ECPseudolinError):
    """Interval widths are too large to decide; caller may retry with smaller eps."""


class NotFound(ECPseudolinError):
    """Search exhausted its box without a qualifying candidate."""


class RankExhausted(ECPseudolinError):
    """The subgroup already has full rank relative to the supplied basis."""


class NoGoodPrime(ECPseudolinError):
    """No prime of good reduction exists below the requested cutoff."""


class PreconditionViolated(ECPseudolinError):
    """Caller-supplied arguments violate a documented precondition."""


class ParseError(ECPseudolinError):
    """Malformed curve, point, or subgroup input."""
