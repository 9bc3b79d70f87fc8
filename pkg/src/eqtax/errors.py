"""Exception hierarchy.

Everything derives from :class:`EqtaxError`, itself a ``ValueError`` so that
callers who only care about "bad input" can catch the builtin.
"""


class EqtaxError(ValueError):
    pass


class DomainError(EqtaxError):
    """An argument lies outside the support or parameter range of a formula."""


class InfeasibleEconomyError(EqtaxError):
    """Capital mass too small to support a Pareto tail with exponent > 2."""


class InfeasibleLevyError(EqtaxError):
    """Requested revenue exceeds what the capital class can yield.

    ``max_delta_m`` carries the supremum of feasible levies (EUR).
    """

    def __init__(self, message, max_delta_m=None):
        super().__init__(message)
        self.max_delta_m = max_delta_m


class EstimationError(EqtaxError):
    pass


class ParseError(EqtaxError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class ConfigError(EqtaxError):
    pass
