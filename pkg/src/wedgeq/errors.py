"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` string and a process ``exit_code``
so the command-line layer can map failures to machine-checkable results
without inspecting messages.
"""


class WedgeqError(Exception):
    """Base class for all package errors."""

    exit_code = 1
    code = "error"


class ValidationError(WedgeqError, ValueError):
    """A parameter or configuration value violates a documented invariant."""

    exit_code = 2
    code = "validation"

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class StabilityError(WedgeqError, RuntimeError):
    """Offered load is at or beyond capacity where a stable queue is required."""

    exit_code = 3
    code = "unstable"

    def __init__(self, message, rho=None):
        super().__init__(message)
        self.rho = rho


class InfeasibleError(WedgeqError, RuntimeError):
    """No admissible choice satisfies the requested constraint."""

    exit_code = 3
    code = "infeasible"


class NoRootError(WedgeqError, RuntimeError):
    """A root-finding scan exhausted its bracket without a sign change."""

    exit_code = 4
    code = "no-root"

    def __init__(self, message, thetas=None, residuals=None):
        super().__init__(message)
        self.thetas = thetas
        self.residuals = residuals


class QuadratureError(WedgeqError, RuntimeError):
    """Numerical integration failed its self-consistency check."""

    code = "quadrature"

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate
