"""Exception hierarchy shared by every module."""


class GeoCompleteError(Exception):
    """Base class for all errors raised by geocomplete."""


class InvalidAlgebra(GeoCompleteError):
    pass


class InconsistentBrackets(InvalidAlgebra):
    """Sparse bracket list contradicts itself (e.g. [e1,e2] and [e2,e1] disagree)."""


class JacobiViolation(InvalidAlgebra):
    pass


class NotUnimodular(GeoCompleteError):
    pass


class BadParams(GeoCompleteError):
    pass


class DegenerateMetric(GeoCompleteError):
    pass


class IllConditionedMetric(DegenerateMetric):
    pass


class DegenerateKilling(GeoCompleteError):
    pass


class AmbiguousSpectrum(GeoCompleteError):
    """Eigenvalue multiplicity cannot be decided at the configured tolerance."""


class DependentSpan(GeoCompleteError):
    pass


class ResidualTooHigh(GeoCompleteError):
    pass


class DegenerateInput(GeoCompleteError):
    pass


class NotE11(GeoCompleteError):
    pass


class InternalInconsistency(GeoCompleteError):
    """A closed-form criterion and the generic idempotent search disagree."""


class BadOptions(GeoCompleteError):
    pass


class InsufficientTail(GeoCompleteError):
    pass


class SpecError(GeoCompleteError):
    """Malformed problem specification (file, JSON or field values)."""
