"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class AseClusterError(Exception):
    """Base class for all errors raised by this package."""


class ModelValidationError(AseClusterError, ValueError):
    """Raised when a graph model or latent distribution violates its constraints."""


class PreconditionError(AseClusterError, ValueError):
    """Raised when an operation is called outside its documented preconditions."""


class TooFewDistinctRows(PreconditionError):
    """Raised when K exceeds the number of distinct rows available for clustering."""

    def __init__(self, k: int, distinct: int) -> None:
        super().__init__(
            f"K must not exceed the number of distinct rows (got K={k}, distinct rows={distinct})"
        )
        self.k = k
        self.distinct = distinct


class NumericalError(AseClusterError):
    """Base class for degenerate numerical outcomes (CLI exit code 2)."""


class NonPositiveSpectrum(NumericalError):
    """A retained eigenvalue of the adjacency matrix is not strictly positive."""

    def __init__(self, index: int, value: float) -> None:
        super().__init__(
            f"retained eigenvalue must be positive (eigenvalue #{index} = {value:.6g})"
        )
        self.index = index
        self.value = value


class ZeroRow(NumericalError):
    """A row cannot be projected onto the unit sphere because its norm vanishes."""

    def __init__(self, index: int, norm: float = 0.0) -> None:
        super().__init__(f"row norm must exceed 1e-12 for sphere projection (row {index}, norm {norm:.3g})")
        self.index = index
        self.norm = norm


class EigenSolverError(NumericalError):
    """The eigensolver did not reach the requested residual."""

    def __init__(self, message: str, achieved_residual: float) -> None:
        super().__init__(f"{message} (achieved residual {achieved_residual:.3e})")
        self.achieved_residual = achieved_residual


__all__ = [
    "AseClusterError",
    "EigenSolverError",
    "ModelValidationError",
    "NonPositiveSpectrum",
    "NumericalError",
    "PreconditionError",
    "TooFewDistinctRows",
    "ZeroRow",
]
