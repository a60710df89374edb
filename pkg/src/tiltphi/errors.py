"""Exception hierarchy shared by all layers."""


class TiltphiError(Exception):
    """Base class for every error raised by the package."""


class ConfigMismatch(TiltphiError, ValueError):
    """Operands live in different fields or ring configurations."""


class GridError(TiltphiError, ValueError):
    """An exponent does not lie on the configured grid (1/D)Z."""


class NotAUnit(TiltphiError, ValueError):
    pass


class NoRootError(TiltphiError, ValueError):
    """A root does not exist in the configured field.

    ``extension_degree`` is the smallest k such that the root exists
    in the degree-k extension of the configured field.
    """

    def __init__(self, message, extension_degree=None):
        super().__init__(message)
        self.extension_degree = extension_degree


class PrecisionExhausted(TiltphiError):
    """The requested quantity is not determined at the working precision."""


class SolverError(TiltphiError):
    """A fixed-point solve could not be certified."""


class HypothesisError(TiltphiError, ValueError):
    """Inputs fall outside the hypotheses under which a result holds."""


class ParseError(TiltphiError, ValueError):
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
