class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class IndexParseError(DomainError):
    """Malformed multi-index text."""
