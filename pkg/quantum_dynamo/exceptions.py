"""Exception hierarchy for quantum_dynamo."""

from typing import List, Optional


class DynamoError(Exception):
    """Base class for all library errors."""


class DomainError(DynamoError, ValueError):
    """An argument lies outside the mathematical domain of a formula."""


class ArgumentError(DynamoError, ValueError):
    """An argument is malformed (empty trajectory, zero modes, ...)."""


class PreparationError(DynamoError):
    """The Fock truncation cannot hold the requested initial state."""

    def __init__(self, message: str, required: Optional[List[int]] = None):
        super().__init__(message)
        self.required = list(required or [])


class IntegrationError(DynamoError):
    """The propagation produced non-finite or unphysical values."""


class FieldConstructionError(DynamoError):
    """The stochastic field cannot be built from the given coefficients."""


class ConfigValidationError(DynamoError):
    """An experiment configuration failed validation.

    Attributes:
        keys: dotted paths of the offending configuration entries
    """

    def __init__(self, message: str, keys: Optional[List[str]] = None):
        super().__init__(message)
        self.keys = list(keys or [])


class UnknownPresetError(DynamoError, KeyError):
    """No preset is registered under the requested name."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""
