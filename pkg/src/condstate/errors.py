"""Exception hierarchy.

Structural problems (bad labels, malformed inputs, invalid channels) derive
from :class:`ValidationError`; numerical-domain problems (negative spectra,
undefined logarithms, zero-probability conditioning) derive from
:class:`NumericalDomainError`.  The CLI maps the two families onto distinct
exit codes.
"""


class CondStateError(ValueError):
    """Base class for every error raised by the package."""


class ParseError(CondStateError):
    """Malformed scenario input (bad JSON, missing keys, non-square payloads)."""


class ValidationError(CondStateError):
    pass


class NumericalDomainError(CondStateError):
    pass


class LabelCollisionError(ValidationError):
    pass


class LabelNotFoundError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class ShapeError(ValidationError):
    """Matrix has the wrong shape or is not Hermitian where it must be."""


class ClassicalityError(ValidationError):
    pass


class POVMError(ValidationError):
    pass


class StateError(ValidationError):
    pass


class IsometryError(ValidationError):
    pass


class ChannelError(ValidationError):
    pass


class FlavorError(ValidationError):
    """Conditional states of incompatible causal flavor were combined."""


class NegativityError(NumericalDomainError):
    pass


class DomainError(NumericalDomainError):
    pass


class ProbabilityZeroError(NumericalDomainError):
    pass
