"""Exception types and the stable reason codes reported by the CLI."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""

    reason = "DOMAIN"


class BoundValidityError(ValueError):
    """A bound's preconditions fail, so its value would not be a valid bound."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class ConvergenceError(RuntimeError):
    """Blahut-Arimoto did not reach the requested duality gap."""

    reason = "SOLVER_NO_CONVERGENCE"

    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap


# Reason codes, stable for scripting.
LOWER_P_INFEASIBLE = "LOWER_P_INFEASIBLE"
LOWER_DARK_ZERO_LAMBDA = "LOWER_DARK_ZERO_LAMBDA"
LOWER_DARK_OVERFLOW = "LOWER_DARK_OVERFLOW"
EPSILON_TOO_LARGE = "EPSILON_TOO_LARGE"
UPPER_DARK_N_TOO_SMALL = "UPPER_DARK_N_TOO_SMALL"
UPPER_DARK_N_LT_2 = "UPPER_DARK_N_LT_2"
EMPTY_GRID = "EMPTY_GRID"
IO_ERROR = "IO_ERROR"

REASON_CODES = (
    DomainError.reason,
    ConvergenceError.reason,
    LOWER_P_INFEASIBLE,
    LOWER_DARK_ZERO_LAMBDA,
    LOWER_DARK_OVERFLOW,
    EPSILON_TOO_LARGE,
    UPPER_DARK_N_TOO_SMALL,
    UPPER_DARK_N_LT_2,
    EMPTY_GRID,
    IO_ERROR,
)
