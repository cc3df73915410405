"""Exception hierarchy shared by every module."""


class EcoError(Exception):
    """Base class for all domain errors raised by this package."""


class DomainError(EcoError, ValueError):
    pass


class DecOverflow(EcoError, OverflowError):
    pass


class ToleranceNotMet(EcoError):
    pass


class NoBracket(EcoError, ValueError):
    pass


class InvalidParams(EcoError, ValueError):
    pass


class NegativeSupply(InvalidParams):
    pass


class BurnExceedsSupply(EcoError, ValueError):
    pass


class ZeroPayment(EcoError, ValueError):
    pass


class DustPayment(ZeroPayment):
    """Payment too small to mint a single base unit of tokens."""


class InsolvencyBreach(EcoError):
    pass


class JournalError(EcoError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnknownOrg(EcoError, KeyError):
    pass


class ScenarioError(EcoError, ValueError):
    pass


class CsvFormatError(EcoError, ValueError):
    """A CSV file whose header does not match the expected schema."""
