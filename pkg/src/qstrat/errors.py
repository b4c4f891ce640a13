"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ValidationFailedError is a "structurally
wrong representation" (exit 2), everything else derived from QstratError is a
usage/model error (exit 1).
"""


class QstratError(Exception):
    """Base class for all errors raised by this package."""


class LabelNotFoundError(QstratError):
    """A tensor-factor label was requested that the space list does not contain."""


class ContractViolationError(QstratError):
    """An input violated a numeric precondition (e.g. a non-Hermitian matrix)."""


class ProfileMismatchError(QstratError):
    """Two objects were combined whose turn/space dimensions do not agree."""


class DescriptionInvalidError(QstratError):
    """An operational description breaks its invariants (non-isometry, bad POVM...)."""


class ValidationFailedError(QstratError):
    """A candidate representation failed the linear-constraint validation.

    Carries the offending ValidationReport in ``report`` when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InsufficientEnvironmentError(QstratError):
    """Requested purification environment is smaller than the operator rank."""


class NoIsometryError(QstratError):
    """An isometry was requested into a space of smaller dimension."""


class ModelError(QstratError):
    """A semidefinite program was assembled with inconsistent shapes or data."""


class ProtocolShapeError(QstratError):
    """A coin-flip analysis input does not expose the required outcome labels."""


class ParseError(QstratError):
    """A JSON document does not match the expected schema."""


class RankToleranceWarning(UserWarning):
    """Numerical rank of an operator was ambiguous near the truncation cutoff."""
