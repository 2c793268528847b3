"""Exception types shared across the package."""


class CausalLrpsError(Exception):
    """Base class for all errors raised by this package."""


class SingularSubmatrix(CausalLrpsError):
    """A principal submatrix could not be inverted at working precision."""


class DomainError(CausalLrpsError):
    """Scalar argument outside the mathematical domain of the function."""


class NonPositiveDefiniteInput(CausalLrpsError):
    """Covariance input is indefinite beyond the allowed tolerance."""


class IllegalPenalty(CausalLrpsError):
    """Penalty parameters must be strictly positive."""


class InconsistentPdag(CausalLrpsError):
    """The partially directed graph admits no acyclic consistent extension."""


class TooLarge(CausalLrpsError):
    """Equivalence-class enumeration guard tripped."""


class InsufficientSamples(CausalLrpsError):
    """Sample size too small for the requested operation."""


class NonPositiveResidualVariance(CausalLrpsError):
    """Residual variance collapsed to zero; score undefined."""


class DegenerateK(CausalLrpsError):
    """Number of principal components must be < min(n, p)."""


class EmptyTruth(CausalLrpsError):
    """Precision-recall curve requested against an empty truth set."""


class MismatchedDims(CausalLrpsError):
    """Graphs or matrices being compared have different dimensions."""
