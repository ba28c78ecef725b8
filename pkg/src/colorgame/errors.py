"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An input lies outside the domain an operation accepts."""


class CapacityError(RuntimeError):
    """An exact computation was asked to exceed its configured size limit."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class IllegalMove(ValueError):
    """A move was rejected by the referee. The game state is left untouched."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
