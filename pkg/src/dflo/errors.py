"""Exception hierarchy.

Every error raised by the library derives from :class:`DfloError`.  The CLI
maps the three families below onto exit codes.
"""

from __future__ import annotations


class DfloError(Exception):
    """Base class for all library errors."""

    code = "error"


class ValidationError(DfloError, ValueError):
    """Malformed input: wrong shapes, bad indices, inconsistent programs."""

    code = "validation_error"


class NumericalError(DfloError, ArithmeticError):
    """A numerical kernel could not produce a trustworthy answer."""

    code = "numerical_error"


class ParseError(DfloError, ValueError):
    """An input file is not valid JSON or does not match its schema.

    ``path`` locates the offending element, e.g. ``"gates/2/t"``.
    """

    code = "parse_error"

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.path = path


# -- validation --------------------------------------------------------------


class NonSquare(ValidationError):
    code = "non_square"


class NotAntisymmetric(ValidationError):
    code = "not_antisymmetric"


class OddDimension(ValidationError):
    code = "odd_dimension"


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class IndexOutOfRange(ValidationError, IndexError):
    code = "index_out_of_range"


class SelfHopping(ValidationError):
    code = "self_hopping"


class LengthMismatch(ValidationError):
    code = "length_mismatch"


class ZeroModes(ValidationError):
    code = "zero_modes"


class BadBit(ValidationError):
    code = "bad_bit"


class OddCount(ValidationError):
    code = "odd_count"


class NotIncreasing(ValidationError):
    code = "not_increasing"


class NegativeTime(ValidationError):
    code = "negative_time"


class TimeTooLarge(ValidationError):
    code = "time_too_large"


class DuplicateMode(ValidationError):
    code = "duplicate_mode"


class ImpossibleOutcome(ValidationError):
    code = "impossible_outcome"


class TooManyModes(ValidationError):
    code = "too_many_modes"


class ProgramError(ValidationError):
    """A program violates its structural invariants.

    ``gate_index`` is set when the failure can be attributed to one gate.
    """

    code = "program_error"

    def __init__(self, message: str, gate_index: int | None = None):
        super().__init__(message)
        self.gate_index = gate_index


# -- numerical ---------------------------------------------------------------


class IterationLimitExceeded(NumericalError):
    code = "iteration_limit_exceeded"


class SingularSystem(NumericalError):
    code = "singular_system"


class NoUniqueSteadyState(SingularSystem):
    code = "no_unique_steady_state"


class IllConditionedSpectrum(NumericalError):
    code = "ill_conditioned_spectrum"


class NonPhysicalResidue(NumericalError):
    code = "non_physical_residue"
