"""
Error types for CovertLink
Every error carries the CLI exit code it maps to
"""

from typing import Any, Dict, Optional


class CovertLinkError(Exception):
    """Base class for all CovertLink errors"""

    exit_code = 1


class InvalidParameterError(CovertLinkError, ValueError):
    """A precondition on an input was violated"""

    exit_code = 2


class InvalidDimensionError(InvalidParameterError):
    """Fock dimension too small for the requested operator"""


class InsufficientDimensionError(InvalidParameterError):
    """Displacement amplitude too large for the requested basis"""


class NumericalInstabilityError(CovertLinkError):
    """A numerical procedure could not reach its accuracy target"""

    exit_code = 3


class TruncationOverflowError(NumericalInstabilityError):
    """Auto-grown truncation would exceed the policy's max_dim"""

    def __init__(self, message: str, required_dim: Optional[int] = None, max_dim: Optional[int] = None):
        super().__init__(message)
        self.required_dim = required_dim
        self.max_dim = max_dim


class DivergenceInfiniteError(NumericalInstabilityError):
    """Reference state is rank deficient on the support of the first argument"""


class UnstableFitError(NumericalInstabilityError):
    """Coefficient refinement became non-monotone; noise dominates the signal"""

    def __init__(self, message: str, ratios: Optional[list] = None):
        super().__init__(message)
        self.ratios = ratios or []


class InvalidBracketError(NumericalInstabilityError):
    """Root bracket does not straddle the target"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigurationRejectedError(CovertLinkError):
    """A simulation configuration was refused before running"""

    exit_code = 4


class BudgetNotBindingError(ConfigurationRejectedError):
    """Sparsification fraction above 1: the photon budget does not bind"""

    def __init__(self, message: str, tau: float):
        super().__init__(message)
        self.tau = tau
