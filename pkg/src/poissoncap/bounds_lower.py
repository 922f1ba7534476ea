"""Closed-form achievability bounds from on-off keying and their parameter
schedules.

Every bound here is a lower bound on the mutual information of the binary
input (level ``zeta`` w.p. ``p``), hence on capacity whenever the input meets
the power constraints.
"""
import math
from dataclasses import dataclass

from . import errors
from .errors import BoundValidityError, DomainError

__all__ = [
    "LowerBoundParams",
    "lower_prop",
    "lower_prop_scheduled",
    "lower_dark",
    "lower_dark_scheduled",
    "prop_ratio_limit",
    "MAX_P",
    "EXP_GUARD",
]

# "small enough E" made concrete: scheduled on-probability must not exceed this
MAX_P = 0.5
# largest allowed zeta^2 / lambda in e^{zeta^2/lambda}
EXP_GUARD = 700.0


@dataclass(frozen=True)
class LowerBoundParams:
    zeta: float
    p: float

    @property
    def average_power(self):
        return self.p * self.zeta


def _check(lam, zeta, p):
    if not lam >= 0.0 or math.isinf(lam):
        raise DomainError(f"dark current must be finite and >= 0, got {lam!r}")
    if not zeta > 0.0 or math.isinf(zeta):
        raise DomainError(f"zeta must be positive and finite, got {zeta!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")


def lower_prop(lam: float, zeta: float, p: float) -> float:
    """Lower bound for small dark current: the sum of

    ``-lam - p (lam + zeta)``                       (bound on the y = 0 part), and
    ``(1-p)(1-e^-lam) log(1/p) + p (1-e^-zeta) log(1/p)
      - lam^2 e^zeta / (p zeta) - lam - lam zeta - (1-p) lam log(1 + zeta/lam)``.

    At ``lam == 0`` the last two lambda terms take their limit 0.
    """
    _check(lam, zeta, p)
    log_inv_p = -math.log(p)
    head = -lam - p * (lam + zeta)
    tail = (1.0 - p) * (-math.expm1(-lam)) * log_inv_p - p * math.expm1(-zeta) * log_inv_p
    if lam > 0.0:
        tail -= lam * lam / zeta * math.exp(zeta) / p
        tail -= (1.0 - p) * lam * math.log1p(zeta / lam)
    tail -= lam + lam * zeta
    return head + tail


def _scheduled_p(E, zeta):
    p = E / zeta
    if not p < 1.0:
        raise BoundValidityError(
            errors.LOWER_P_INFEASIBLE, f"E={E!r} >= zeta={zeta!r}: on-probability E/zeta >= 1"
        )
    if p > MAX_P:
        raise BoundValidityError(
            errors.LOWER_P_INFEASIBLE,
            f"E/zeta = {p:.6g} exceeds {MAX_P}; E is not small enough for zeta={zeta!r}",
        )
    return p


def lower_prop_scheduled(c: float, E: float, zeta: float, peak: float = math.inf) -> float:
    """``lower_prop(c E, zeta, E/zeta)``: on-off keying at fixed level ``zeta``
    meeting ``E[X] = E`` exactly, with dark current proportional to ``E``."""
    if not c >= 0.0:
        raise DomainError(f"c must be >= 0, got {c!r}")
    if not E > 0.0:
        raise DomainError(f"E must be > 0, got {E!r}")
    if zeta > peak:
        raise BoundValidityError(
            errors.LOWER_P_INFEASIBLE, f"zeta={zeta!r} exceeds the peak constraint {peak!r}"
        )
    p = _scheduled_p(E, zeta)
    return lower_prop(c * E, zeta, p)


def prop_ratio_limit(zeta: float) -> float:
    """``(1 - e^-zeta) / zeta``, the limit of ``lower_prop_scheduled / (E log 1/E)``."""
    if not zeta > 0.0:
        raise DomainError(f"zeta must be positive, got {zeta!r}")
    return -math.expm1(-zeta) / zeta


def lower_dark(lam: float, zeta: float, p: float) -> float:
    """Lower bound for a positive dark current:
    ``p (zeta + lam) log(1 + zeta/lam) - p zeta - p - p^2 (e^{zeta^2/lam} - 1)``."""
    _check(lam, zeta, p)
    if lam == 0.0:
        raise BoundValidityError(
            errors.LOWER_DARK_ZERO_LAMBDA, "lower_dark requires a positive dark current"
        )
    expo = zeta * zeta / lam
    if expo > EXP_GUARD:
        raise BoundValidityError(
            errors.LOWER_DARK_OVERFLOW,
            f"zeta^2/lambda = {expo:.6g} > {EXP_GUARD}; choose a smaller zeta",
        )
    return p * (zeta + lam) * math.log1p(zeta / lam) - p * zeta - p - p * p * math.expm1(expo)


def dark_schedule(lam: float, E: float) -> LowerBoundParams:
    """``zeta = sqrt(lam log(1/E))`` and ``p = E / zeta``."""
    if not lam > 0.0:
        raise BoundValidityError(
            errors.LOWER_DARK_ZERO_LAMBDA, "lower_dark requires a positive dark current"
        )
    if not E > 0.0:
        raise DomainError(f"E must be > 0, got {E!r}")
    if not E < math.exp(-1.0):
        raise BoundValidityError(
            errors.EPSILON_TOO_LARGE, f"E={E!r} must be below 1/e for the dark-current schedule"
        )
    zeta = math.sqrt(lam * math.log(1.0 / E))
    return LowerBoundParams(zeta, _scheduled_p(E, zeta))


def lower_dark_scheduled(lam: float, E: float) -> float:
    """:func:`lower_dark` at ``zeta = sqrt(lam log(1/E))``, ``p = E / zeta``."""
    prm = dark_schedule(lam, E)
    return lower_dark(lam, prm.zeta, prm.p)
