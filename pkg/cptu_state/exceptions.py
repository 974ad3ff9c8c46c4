"""Custom exceptions for the cptu-state package."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .models import SoilState


class CptuStateError(Exception):
    """Base class for every error raised by the package."""

    pass


class InputError(CptuStateError, ValueError):
    """Arguments or records outside the documented input domain."""

    pass


class DomainError(CptuStateError, ValueError):
    """A formula was evaluated where it has no physical or mathematical meaning."""

    pass


class NonPhysicalResistanceError(DomainError):
    """Normalized effective resistance Q' is zero or negative."""

    pass


class NumericalError(CptuStateError, ArithmeticError):
    """A numerical procedure failed to converge."""

    pass


class IntegrationError(NumericalError):
    """Stress integration failed; carries the last accepted state."""

    def __init__(self, message: str, last_state: SoilState | None = None) -> None:
        super().__init__(message)
        self.last_state = last_state


class IntegrityError(CptuStateError):
    """Bundled reference data does not match its manifest."""

    pass
