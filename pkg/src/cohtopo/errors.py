"""Exception hierarchy.

Every validation failure derives from :class:`ValidationError` (itself a
``ValueError``) so callers, and the CLI exit-code mapping, can catch the
whole family at once.
"""


class ValidationError(ValueError):
    pass


class DegenerateInputError(ValidationError):
    """Input too short or without variance for the requested statistic."""


class LagRangeError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    """Series shorter than one Welch segment."""


class DegenerateCoherenceError(ValidationError):
    """Fewer than two averaged segments; coherence would be identically one."""


class ConnectivityError(ValidationError):
    pass


class SpecError(ValidationError):
    """Invalid network specification (e.g. unstable filter, broken tree)."""


class ParseError(ValidationError):
    def __init__(self, message, *, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class PairwiseFailure(ValidationError):
    """Some pairs of a distance matrix could not be computed.

    ``matrix`` holds the partial result (NaN where a pair failed) and
    ``failures`` maps each failing ``(i, j)`` pair to its error.
    """

    def __init__(self, matrix, failures):
        pairs = ", ".join(f"({i}, {j})" for i, j in sorted(failures))
        super().__init__(f"{len(failures)} pair(s) failed: {pairs}")
        self.matrix = matrix
        self.failures = failures
