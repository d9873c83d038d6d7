"""stratquiver: exact computations with stratified quiver algebras.

Builds finite-dimensional path-algebra quotients, their standard and
costandard module families, tilting and cotilting modules, the Ringel
dual, the two-step dual, and the homological invariants attached to all
of these, entirely in exact arithmetic.
"""

from .exactlin import Field
from .errors import EngineError, InputError, NonSplitError, TheoremViolation, UndecidedError

__all__ = [
    "Field",
    "EngineError",
    "InputError",
    "NonSplitError",
    "TheoremViolation",
    "UndecidedError",
]

__version__ = "0.1.0"
