"""Exception types shared across the package."""


class GapcgError(Exception):
    """Base class for all package errors."""


class ZeroInverse(GapcgError, ZeroDivisionError):
    """Multiplicative inverse of zero requested."""


class IndexOutOfRange(GapcgError, IndexError):
    """A group or domain index is outside its valid range."""


class SpecMismatch(GapcgError, ValueError):
    """Operands belong to different field/group specifications."""


class NoRootOfUnity(GapcgError, ValueError):
    """The field has no primitive root of unity of the required order."""


class NotASubgroup(GapcgError, ValueError):
    """The given index set is not a subgroup."""


class InvalidPoint(GapcgError, ValueError):
    """Invalid point-function parameters (position or value)."""


class LengthMismatch(GapcgError, ValueError):
    """Parallel lists have different lengths."""


class InvalidSpec(GapcgError, ValueError):
    """A noise specification is malformed or unsatisfiable."""


class ParamError(GapcgError, ValueError):
    """Invalid correlation-generator parameters."""


class SeedMismatch(GapcgError, ValueError):
    """A seed does not match the parameters it is expanded under."""


class BatchMismatch(GapcgError, ValueError):
    """Correlation batches are not aligned."""


class InconsistentProgramming(GapcgError, ValueError):
    """The same programmed input produced different expanded values."""


class InsufficientTriples(GapcgError, ValueError):
    """Not enough preprocessed triples for the circuit."""


class MaskMismatch(GapcgError, ValueError):
    """Mask material does not match the circuit it is used with."""


class MalformedCircuit(GapcgError, ValueError):
    """A circuit violates well-formedness (wires, ordering, arity)."""


class RangeError(GapcgError, ValueError):
    """A numeric argument is outside the formula's domain."""
