"""Exception types raised by powerdist."""


class PowerDistError(ValueError):
    """Base class for all input/contract errors."""


class MatrixError(PowerDistError):
    """A candidate matrix cannot be accepted as a dissimilarity matrix."""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class DegenerateMatrixError(PowerDistError):
    """Raised when an operation needs d(x, y) > 0 for all x != y."""


class VacuousRelationError(PowerDistError):
    """The relation fails only because of degenerate triples (z = x or z = y).

    Under the all-triples policy with p <= 0, tau(x, y, x) is 0 for every
    pair, so the relation can never hold on a space with two distinct points.
    """

    code = "vacuous-degenerate-triples"


class UnsupportedParameterError(PowerDistError):
    """The requested (p, sigma) is outside the domain of an operation."""


class UncertifiedLimitError(PowerDistError):
    """A continuity check was asked to use a limit that was not certified."""
