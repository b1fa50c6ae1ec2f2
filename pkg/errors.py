"""
Exception hierarchy shared by every module.

Two families: ValidationError (bad input, CLI exit 2) and NumericalError
(the computation itself failed, CLI exit 3). Degenerate cross ratios are not
errors, see projective_geometry.Degenerate.
"""

from typing import Any, Dict, Optional


class MonodromyError(Exception):
    """Base class; `details` carries diagnostics for structured output."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


class ValidationError(MonodromyError):
    pass


class NumericalError(MonodromyError):
    pass


# projective_geometry
class DegenerateTriple(ValidationError):
    pass


class IdentityMap(ValidationError):
    pass


# surface
class SelfFoldedInterior(ValidationError):
    pass


class NotAPuncture(ValidationError):
    pass


class UnsupportedSurface(ValidationError):
    pass


class SerializationError(ValidationError):
    pass


# framed / cluster
class TriangulationMismatch(ValidationError):
    pass


class NonRegularInput(ValidationError):
    pass


class NonSemisimpleHolonomy(ValidationError):
    pass


class DegenerateInput(ValidationError):
    pass


class MutationPole(NumericalError):
    pass


class BudgetExceeded(NumericalError):
    pass


# ode
class NoPoles(ValidationError):
    pass


class DegenerateSurface(ValidationError):
    pass


class RealizationRequired(ValidationError):
    pass


class PathTooClose(ValidationError):
    pass


class StepFailure(NumericalError):
    pass


class SeedNotFound(NumericalError):
    pass


class ResonantOrApparent(NumericalError):
    pass


class AmbiguousMatch(NumericalError):
    pass


# settings
class ConfigError(ValidationError):
    pass
