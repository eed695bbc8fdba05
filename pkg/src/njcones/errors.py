"""Exception hierarchy shared by all njcones modules."""


class NJConesError(Exception):
    """Base class for every error raised by njcones."""


class DissimilarityError(NJConesError, ValueError):
    """Input is not a valid dissimilarity map."""


class AsymmetryError(DissimilarityError):
    pass


class NonzeroDiagonalError(DissimilarityError):
    pass


class NegativeEntryError(DissimilarityError):
    pass


class TooSmallError(DissimilarityError):
    pass


class ParseError(NJConesError, ValueError):
    """Malformed matrix file. Carries 1-based ``line`` and ``column``."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class KTooSmall(NJConesError, ValueError):
    pass


class MalformedTrace(NJConesError, ValueError):
    pass


class NewickError(NJConesError, ValueError):
    pass


class GrammarError(NewickError):
    """Syntax error in an ordered Newick string; ``position`` is 0-based."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class LabelError(NewickError):
    pass


class OrderError(NewickError):
    pass


class InvalidPath(NJConesError, ValueError):
    pass


class TooLarge(NJConesError, ValueError):
    pass
