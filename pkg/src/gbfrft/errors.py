"""Error taxonomy shared across the package.

Every failure mode that callers are expected to handle maps to one of
these classes; the CLI prints the class name as a machine-parsable tag.
"""


class GbfrftError(Exception):
    """Base class for package-specific errors."""


class DefectiveMatrix(GbfrftError):
    """Matrix is not (numerically) diagonalizable."""


class SingularPower(GbfrftError):
    """Fractional power undefined: zero eigenvalue with non-positive order."""


class SingularBlend(GbfrftError):
    """Blended transform factor is numerically singular."""


class NonFinite(GbfrftError):
    """Non-finite values where finite ones are required."""


class ShapeMismatch(GbfrftError):
    """Operand shapes are incompatible."""


class SizeCapExceeded(GbfrftError):
    """Problem size exceeds the configured materialization cap."""


class NonHermitianStatistics(GbfrftError):
    """Covariance inputs violate Hermitian or PSD requirements."""


class DivergedLoss(GbfrftError):
    """Training loss became non-finite."""


class ParseError(GbfrftError):
    """Malformed configuration or data file."""


class RaggedRows(ParseError):
    """Tabular file rows have inconsistent lengths."""


class ConstantSeries(GbfrftError):
    """A series has (near-)zero variance and cannot be standardized."""


class SchemaMismatch(GbfrftError):
    """Result rows do not match the requested output layout."""


class IllConditionedSystem(UserWarning):
    """Normal equations were ill-conditioned; a least-squares solution was used."""
