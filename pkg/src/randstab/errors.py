"""Exception types shared across the library."""


class RandstabError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(RandstabError):
    """Operand shapes are inconsistent with the declared system dimensions."""


class NonFinite(RandstabError):
    """An input matrix contains NaN or Inf entries."""


class NoConvergence(RandstabError):
    """The Riccati iteration diverged or failed to converge.

    For randomly drawn parameters this signals that the draw (most likely)
    lacks a stabilizing solution; callers such as the SP algorithm treat it
    as a redraw trigger rather than a fatal error.
    """


class SingularInnerMatrix(RandstabError):
    """B'KB + R is numerically singular (only possible with invalid inputs)."""


class EmptyTrajectory(RandstabError):
    """A trajectory with zero transitions was passed to an estimator."""


class RankDeficientBasis(RandstabError):
    """The stacked gain-basis matrix has row rank < p + r, so the open-loop
    parameter cannot be identified from the closed-loop estimates."""


class ConfigError(RandstabError):
    """An algorithm or experiment configuration violates its constraints."""


class RedrawBudgetExhausted(RandstabError):
    """An SP episode burned through its entire redraw budget without finding
    a parameter draw whose Riccati equation is solvable."""

    def __init__(self, message: str, redraws: int = 0):
        super().__init__(message)
        self.redraws = redraws


class EmptyInput(RandstabError):
    """An aggregation was asked to summarize zero records."""
