"""Exception hierarchy for Conicert.

Library code raises these; the CLI maps them to exit codes and the
web app maps them to HTTP status codes.
"""
from typing import Any, Optional, Sequence


class ConicertError(Exception):
    """Base class for every error raised by the engine."""


class InputError(ConicertError, ValueError):
    """Malformed or invalid input data."""


class FieldSpecError(InputError):
    """Invalid characteristic, extension degree or modulus."""


class FieldMismatchError(InputError):
    """Operands that do not live in the same field."""


class PointError(InputError):
    """A closed point that is not a monic irreducible (or not rational when required)."""


class MapError(InputError):
    """A rational map that is zero or not dominant."""


class MobiusError(InputError):
    """Repeated or non-rational points given to a Mobius construction."""


class LocusError(InputError):
    """A prescribed non-split locus that cannot be realized."""


class ArithmeticFieldError(ConicertError, ArithmeticError):
    """Field arithmetic that has no answer."""


class ZeroInverseError(ArithmeticFieldError):
    """Inversion of zero (or a norm equation with right-hand side zero)."""


class NotASquareError(ArithmeticFieldError):
    """Square root requested for a nonsquare."""


class HypothesisError(ConicertError):
    """The non-split locus does not satisfy the condition a pipeline needs."""


class SynthesisError(ConicertError):
    """A construction step failed its own post-check or a search ran dry.

    Args:
        message: Human readable reason
        chain: Audit chain built before the failure (serialized steps)
    """

    def __init__(self, message: str, chain: Optional[Sequence[Any]] = None):
        super().__init__(message)
        self.chain = list(chain or [])


class VerificationError(ConicertError):
    """A certificate did not re-verify."""


class BudgetExceeded(ConicertError):
    """The configured time budget ran out before a search finished."""
