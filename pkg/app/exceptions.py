"""
Error hierarchy for the FENNEC toolkit.
Routes map FennecError to HTTP 400, the CLI maps ConfigError/IngestionError to exit 2.
"""


class FennecError(Exception):
    """Base class for every toolkit error"""


class DomainError(FennecError, ValueError):
    """Physical input outside the model's domain"""


class SingularityError(FennecError, ArithmeticError):
    """Singular matrix assembly or pole of a closed form"""


class ConvergenceError(FennecError, RuntimeError):
    """Root bracket, fixed point or eigen-solve failed"""

    def __init__(self, message: str, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class IngestionError(FennecError, ValueError):
    """Spectroscopy data could not be read"""


class ConfigError(FennecError, ValueError):
    """Run configuration violates its schema"""

    def __init__(self, message: str, field: str = None):
        super().__init__(message)
        self.field = field
