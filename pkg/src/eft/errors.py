"""Exception hierarchy shared by all modules."""


class EftError(Exception):
    """Base class for every error raised by this package."""


class SymmetryError(EftError, ValueError):
    """An adjacency matrix (or edge list) is not symmetric."""


class DomainError(EftError, ValueError):
    """An argument lies outside its admissible domain."""


class ShapeError(EftError, ValueError):
    """Array dimensions do not agree."""


class NumericalError(EftError, ArithmeticError):
    """A numerical routine failed (e.g. eigensolver non-convergence)."""


class SizeGuardError(EftError, MemoryError):
    """A dense NT x NT object was requested above the size guard."""


class ParseError(EftError, ValueError):
    """Malformed input file. Carries the 1-based line and column when known."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where += ": "
        super().__init__(where + message)
