class MiniLangError(Exception):
    """Base class for front-end errors; carries a 1-based source location."""

    kind = "error"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{self.kind} at {line}:{col}: {message}")


class ParseError(MiniLangError):
    kind = "parse error"


class TypeCheckError(MiniLangError):
    kind = "type error"
