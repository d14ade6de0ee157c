"""Exception hierarchy shared by every module of the package."""


class OracleGameError(Exception):
    """Base class for all errors raised by :mod:`oracle_games`."""


class ShapeMismatch(OracleGameError, ValueError):
    pass


DimensionMismatch = ShapeMismatch


class AmbiguousBestResponse(OracleGameError):
    """Two rows tie on A's payoff in a column but differ in B's payoff."""

    def __init__(self, column, rows):
        self.column = column
        self.rows = tuple(rows)
        super().__init__(
            f"column {column}: rows {list(self.rows)} tie on A's payoff "
            "but give B different payoffs, so the maximal matrix is ambiguous"
        )


class NotMaximalMatrix(OracleGameError, ValueError):
    pass


class NegativePayment(OracleGameError, ValueError):
    pass


class OutsideDomain(OracleGameError, ValueError):
    pass


class LevelUnreachable(OracleGameError, ValueError):
    pass


class SlopeOutOfRange(OracleGameError, ValueError):
    """The requested slope is never attained.

    ``fallback`` is the supremum of ``{x : I'(x) >= slope}``, which is the
    payment a concave-payoff maximiser would pick instead.
    """

    def __init__(self, slope, fallback):
        self.slope = slope
        self.fallback = fallback
        super().__init__(f"slope {slope!r} is not attained (fallback x={fallback!r})")


class EmptyInput(OracleGameError, ValueError):
    pass


class NotNormalized(OracleGameError, ValueError):
    pass


class DegenerateOracle(OracleGameError, ValueError):
    pass


class NoEquilibriumFound(OracleGameError):
    pass


class TooLarge(OracleGameError, ValueError):
    pass


class InconsistentDominance(OracleGameError):
    pass


class NonUniqueInterior(OracleGameError):
    pass


class MultipleBaseEquilibria(OracleGameError):
    def __init__(self, count):
        self.count = count
        super().__init__(
            f"the base game has {count} equilibria; analyse each one with solve_multi"
        )


class NonMonotoneValue(OracleGameError):
    pass


class NoMixExists(OracleGameError, ValueError):
    pass


class ConsistencyError(OracleGameError):
    """An internal invariant failed; indicates a numerical problem or a bug."""


class SpecFileError(OracleGameError, ValueError):
    """A game or oracle file could not be parsed."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = str(path)
            if line is not None:
                where += f":{line}:{column}"
            where += ": "
        super().__init__(where + message)
