"""Exception hierarchy shared by every module."""


class MarketRankError(Exception):
    """Base class for all errors raised by marketrank."""


class NonPositiveDimension(MarketRankError, ValueError):
    pass


class DegenerateProbability(MarketRankError, ValueError):
    pass


class TimeOrderViolation(MarketRankError, ValueError):
    pass


class DimensionMismatch(MarketRankError, ValueError):
    pass


class TreeMismatch(MarketRankError, ValueError):
    """Two objects live on different filtered trees."""


class NotContained(MarketRankError, ValueError):
    """A containment precondition between subspace fields failed."""


class RankOutOfRange(MarketRankError, ValueError):
    pass


class NotAMartingale(MarketRankError, ValueError):
    pass


class InconsistentResult(MarketRankError, RuntimeError):
    """Two routes that must agree produced different answers."""


class SpecError(MarketRankError):
    """Problem in a market specification, with an optional source location."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)

    def to_dict(self):
        return {
            "error": type(self).__name__,
            "message": self.message,
            "line": self.line,
            "column": self.column,
        }


class SpecSyntaxError(SpecError):
    pass


class UnknownIdentifier(SpecError):
    pass


class ShapeError(SpecError):
    pass
