"""Exception types shared across the library.

Every failure mode callers are expected to handle gets its own class so the
CLI can map errors to exit codes (2 for bad input, 3 for numerical failure)
without string matching.
"""


class LipextError(Exception):
    """Base class for all lipext errors."""


class MetricError(LipextError, ValueError):
    """A distance matrix violates one of the metric axioms."""


class AsymmetryError(MetricError):
    """dist[i][j] != dist[j][i]."""


class NonzeroDiagonalError(MetricError):
    """dist[i][i] != 0."""


class NegativeDistanceError(MetricError):
    """A distance entry is negative."""


class DuplicatePointsError(MetricError):
    """Two distinct points are at distance zero."""


class TriangleViolationError(MetricError):
    """The triangle inequality fails on some triple."""

    def __init__(self, i: int, j: int, k: int, excess: float):
        self.triple = (i, j, k)
        self.excess = excess
        super().__init__(
            f"triangle inequality violated on triple ({i}, {j}, {k}): "
            f"dist[{i}][{k}] exceeds dist[{i}][{j}] + dist[{j}][{k}] by {excess:g}"
        )


class NonFiniteError(LipextError, ValueError):
    """A value that must be a finite float is NaN or infinite."""


class NonFiniteDistanceError(NonFiniteError):
    """A distance is NaN or infinite."""


class DimensionMismatchError(LipextError, ValueError):
    """Array shapes are inconsistent with each other."""


class MissingCoordinatesError(LipextError, ValueError):
    """A Euclidean-mode operation needs coordinates that were not provided."""


class DomainError(LipextError, ValueError):
    """An argument is outside the domain of the requested operation."""


class RankDeficientError(LipextError, ArithmeticError):
    """The sample matrix is (numerically) rank deficient."""


class SolverFailureError(LipextError, ArithmeticError):
    """The least-squares solve produced non-finite output."""


class ZeroDistanceDistinctValuesError(LipextError, ValueError):
    """Two points at distance zero carry different values."""


class ParseError(LipextError, ValueError):
    """Input file is not syntactically valid."""


class SchemaError(LipextError, ValueError):
    """Input file parses but does not match the expected layout."""
