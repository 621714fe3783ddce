"""Exception types shared across the library."""

from __future__ import annotations


class RiemredError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(RiemredError, ValueError):
    """Operands live on different manifolds or have incompatible shapes."""


class DomainError(RiemredError, ValueError):
    """Input is outside the mathematical domain of an operation.

    Raised e.g. for the sphere log map at (near-)antipodal points, a
    singular alignment matrix on the Grassmannian, or a near-singular
    matrix fed to the SPD matrix logarithm.
    """


class RankDeficient(RiemredError, ValueError):
    """QR retraction received a rank-deficient argument."""


class NotSymmetric(RiemredError, ValueError):
    """Matrix expected to be symmetric is not."""


class NotPositiveDefinite(RiemredError, ValueError):
    """Matrix expected to be positive definite is not."""


class NoConvergence(RiemredError, RuntimeError):
    """An iterative solver hit its iteration cap before its tolerance.

    Carries whatever partial state the solver had: ``last_iterate`` for
    the Frechet mean, ``trace`` for gradient descent, ``gap`` for the
    SVM dual.
    """

    def __init__(self, message, last_iterate=None, trace=None, gap=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.trace = trace
        self.gap = gap


class NonFiniteObjective(RiemredError, RuntimeError):
    """Objective or gradient evaluated to NaN/inf during optimization."""


class DegenerateNeighborhood(RiemredError, ValueError):
    """Local Gram matrix stayed singular after regularization."""


class DisconnectedGraph(RiemredError, ValueError):
    """Neighborhood graph has more than one connected component."""

    def __init__(self, component_sizes):
        sizes = sorted(component_sizes, reverse=True)
        super().__init__(
            "graph has %d components with sizes %s" % (len(sizes), sizes)
        )
        self.component_sizes = sizes


class NoNeighbors(RiemredError, ValueError):
    """All extension weights underflowed to zero."""


class NoPositiveSpectrum(RiemredError, ValueError):
    """MDS Gram matrix has no positive eigenvalues to embed with."""


class SingularScatter(RiemredError, ValueError):
    """Within-class scatter unusable even after regularization."""


class ParseError(RiemredError, ValueError):
    """CSV cell failed to parse; carries 1-based row/column."""

    def __init__(self, message, row, col):
        super().__init__("%s (row %d, col %d)" % (message, row, col))
        self.row = row
        self.col = col


class MissingLabelColumn(RiemredError, ValueError):
    """CSV header does not contain the requested label column."""


class ClassTooSmall(RiemredError, ValueError):
    """A class has too few samples for a stratified split."""


class LengthMismatch(RiemredError, ValueError):
    """Paired sequences have different lengths."""


class UnknownKind(RiemredError, ValueError):
    """Unrecognized dataset kind."""
