"""Exception hierarchy.

Every error raised for bad input data derives from :class:`DataError`, which
the CLI maps to exit code 2.
"""

from __future__ import annotations


class DataError(ValueError):
    """Input data violates a contract."""


class LineError(DataError):
    """Error tied to a 1-based line number of an input file."""

    def __init__(self, line: int, detail: str = ""):
        self.line = line
        msg = f"line {line}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


# lexicon
class MalformedRow(LineError):
    pass


class ValenceOutOfRange(LineError):
    pass


class DuplicateToken(DataError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"duplicate token {token!r}")


# corpus
class BadHeader(DataError):
    pass


class NegativeOffset(LineError):
    pass


class ScoreOutOfRange(LineError):
    pass


class LexiconRequired(DataError):
    """Scores must be computed but no lexicon was supplied."""


# stream
class SourceClosed(DataError):
    pass


class MalformedRecord(DataError):
    def __init__(self, position: int, detail: str = ""):
        self.position = position
        super().__init__(f"record {position}" + (f": {detail}" if detail else ""))


# featurization
class EmptyHorizon(DataError):
    pass


# clustering / forecasting
class TooFewPoints(DataError):
    pass


class DegenerateInput(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyCluster(DataError):
    pass


class LengthMismatch(DataError):
    pass


class TooFewVectors(DataError):
    pass


# plotting
class EmptySeries(DataError):
    pass
