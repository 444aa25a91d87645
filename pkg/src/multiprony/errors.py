"""Exception hierarchy shared across the package.

Every error carries a stable machine-readable class string (printed by
the CLI on stderr and recorded in the experiment CSV's failure_class
column) and the process exit code the CLI maps it to.
"""


class MultipronyError(Exception):
    """Base class for all package errors."""

    exit_code = 1
    error_class = "error"


class UsageError(MultipronyError):
    """Invalid arguments or inconsistent inputs supplied by the caller."""

    exit_code = 2
    error_class = "usage"


class DimensionMismatchError(UsageError):
    error_class = "dimension-mismatch"


class InsufficientDegreeError(UsageError):
    """The moment data does not reach the degree an operation requires."""

    error_class = "insufficient-degree"


class NumericFailure(MultipronyError):
    """The computation could not be completed at working precision."""

    exit_code = 3
    error_class = "numeric-failure"


class RankZeroError(NumericFailure):
    error_class = "rank-zero"


class SingularTruncationError(NumericFailure):
    """A forced rank reaches into the zero part of the spectrum."""

    error_class = "singular-truncation"


class SvdConvergenceError(NumericFailure):
    error_class = "svd-non-convergence"


class NearDefectiveError(NumericFailure):
    """No random combination of the operators had separated eigenvalues."""

    error_class = "near-defective"


class UnstableWeightError(NumericFailure):
    """Weight recovery hit a numerically vanishing denominator."""

    error_class = "unstable-weight"


class ScaleEstimateError(NumericFailure):
    """The rescaling factor could not be estimated from the data."""

    error_class = "cannot-estimate-scale"


class FileFormatError(MultipronyError):
    exit_code = 4
    error_class = "file-format"


class ParseError(FileFormatError):
    error_class = "parse-error"


class CompletenessError(FileFormatError):
    """Some moment below the declared degree is missing."""

    error_class = "incomplete-moments"


class LineDimensionError(FileFormatError):
    """A data line has the wrong number of fields for the declared n."""

    error_class = "line-dimension"
