class CardsepError(Exception):
    pass


class PgmFormatError(CardsepError, ValueError):
    """Malformed PGM header."""


class PgmLengthError(PgmFormatError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"truncated pixel data: expected {expected} bytes, got {actual}")
        self.expected = expected
        self.actual = actual


class BoundsError(CardsepError, ValueError):
    pass


class DomainError(CardsepError, ValueError):
    pass


class ConfigError(CardsepError, ValueError):
    pass


class SkewUnavailable(CardsepError):
    """Raised when a profile has no valid column to estimate from."""


class RegionsParseError(CardsepError, ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
