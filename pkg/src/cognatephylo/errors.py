"""Exception hierarchy.  Everything derives from ValueError so callers that
only care about bad input can catch one type."""


class CognatePhyloError(ValueError):
    pass


class FormatError(CognatePhyloError):
    """Input file lacks a required column or has a malformed header."""


class DuplicateIdError(CognatePhyloError):
    def __init__(self, ident):
        super().__init__(f"duplicate ID {ident!r}")
        self.ident = ident


class RowError(CognatePhyloError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(CognatePhyloError):
    def __init__(self, message, position=None):
        where = "" if position is None else f" (at {position})"
        super().__init__(f"{message}{where}")
        self.position = position


class ConfigurationError(CognatePhyloError):
    pass


class UndefinedMetricError(CognatePhyloError):
    """The requested distance has a zero denominator."""
