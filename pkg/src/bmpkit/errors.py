class BmpError(ValueError):
    """Invalid input to a BMP operation (shape mismatch, unknown variable, ...)."""


class LimitExceeded(BmpError):
    """A configured size limit (oracle width, search budget) was hit."""


class ParseError(BmpError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
