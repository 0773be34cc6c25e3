"""Exception types shared across the package."""


class HypercrossError(Exception):
    """Base class for every error raised by this package."""


class SpecError(HypercrossError, ValueError):
    """A cross specification violates a structural invariant."""


class NonMonotoneSequence(SpecError):
    pass


class NonPositiveRate(SpecError):
    pass


class BadExponents(SpecError):
    pass


class BadPrefixBlock(SpecError):
    pass


class UnsupportedZeroM(SpecError):
    pass


class HypothesisViolated(HypercrossError):
    """A theorem hypothesis needed for a bound does not hold."""


class Diverges(HypothesisViolated):
    """An infinite constant series does not converge."""


class PreconditionViolated(HypercrossError, ValueError):
    pass


class NonPositiveC(PreconditionViolated):
    pass


class CountOverflow(HypercrossError, OverflowError):
    """A cardinality does not fit into 128 unsigned bits."""


class InfiniteCross(HypothesisViolated):
    """The cross is not a finite set for the requested threshold.

    This only happens for bounded rate sequences, which already break the
    summability hypothesis of every cardinality theorem.
    """


class BoxTooLarge(HypercrossError):
    """The brute-force box would exceed the point budget."""


class SupportOutsideCross(HypercrossError, ValueError):
    pass


class EllipticityViolated(HypercrossError, ValueError):
    pass


class BoundViolated(HypercrossError):
    """A bound that must hold was violated numerically."""
