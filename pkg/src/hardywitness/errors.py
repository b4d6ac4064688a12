"""Exception types shared across the package."""


class HardyWitnessError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVector(HardyWitnessError):
    """A vector with (numerically) zero norm cannot be normalized."""


class BadPartition(HardyWitnessError):
    """A bipartition does not split the subsystem indices correctly."""


class DimensionMismatch(HardyWitnessError):
    """Array shapes or subsystem dimensions are inconsistent."""


class NonPositiveWeight(HardyWitnessError):
    """Construction weights must be strictly positive."""


class DegeneratePair(HardyWitnessError):
    """The selected weight pair is equal within tolerance."""


class TooLarge(HardyWitnessError):
    """The requested enumeration exceeds the supported instance size."""


class NumericalFailure(HardyWitnessError):
    """A numerical routine failed to meet its own accuracy contract.

    This signals a bug or ill-conditioning, never a physics result.
    """


class ParseError(HardyWitnessError):
    """A state file could not be parsed or validated."""
