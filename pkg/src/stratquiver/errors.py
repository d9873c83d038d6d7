"""Exception hierarchy shared across the engine.

The CLI maps these onto exit codes, so raising the right class matters:
InputError -> 2, UndecidedError -> 3, TheoremViolation -> 4.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine failures."""


class InputError(EngineError):
    """Malformed or out-of-contract input (bad JSON, non-composable paths...)."""


class NonSplitError(EngineError):
    """A split assumption failed over the current field; enlarge the field."""


class UndecidedError(EngineError):
    """A search exhausted its budget without a certificate either way."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class TheoremViolation(EngineError):
    """An identity the paper guarantees failed to verify: engine bug surfaced."""
