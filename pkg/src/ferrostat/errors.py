"""Exception hierarchy shared across the package."""


class FerrostatError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FerrostatError):
    """Invalid configuration file, units, or command-line input."""


class DomainError(FerrostatError):
    """A value violates an operation's mathematical domain (e.g. theta <= 0)."""


class IntegrationError(FerrostatError):
    """Integration could not be completed.

    Carries the last time up to which a valid solution exists.
    """

    def __init__(self, message, last_time=None):
        super().__init__(message)
        self.last_time = last_time


class NegativeStateError(IntegrationError):
    """A state component dropped below -abs_tol during integration."""


class ParseError(FerrostatError):
    """Syntax error in a formula, expression, or constraint.

    Reports the 1-based line/column of the offending token and the set of
    token kinds that would have been accepted there.
    """

    def __init__(self, message, line=None, column=None, expected=()):
        loc = f" at line {line}, column {column}" if line is not None else ""
        exp = f" (expected: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message}{loc}{exp}")
        self.line = line
        self.column = column
        self.expected = tuple(expected)


class UnboundNameError(FerrostatError):
    """A formula or constraint references a name absent from the environment."""


class DegenerateParametersError(FerrostatError):
    """A closed-form expression has a vanishing denominator."""


class NoValidPointError(FerrostatError):
    """The ordered coordinate search exhausted its backtracking budget.

    ``search_trace`` summarizes how far each level of the search got.
    """

    def __init__(self, message, search_trace=()):
        super().__init__(message)
        self.search_trace = tuple(search_trace)


class SpecFalsifiedError(FerrostatError):
    """A required behavioral property evaluated to false."""
