"""Scalar building blocks: Poisson log-pmf and tail mass, upper incomplete gamma,
log-sum-exp.

All logarithms are natural. The degenerate rate ``xi == 0`` is the point mass
at ``y == 0``.
"""
import math
import sys

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

__all__ = [
    "poisson_log_pmf",
    "poisson_log_pmf_array",
    "poisson_tail",
    "truncation_point",
    "upper_incomplete_gamma",
    "log_sum_exp",
]

_EPS = sys.float_info.epsilon
_TINY = sys.float_info.min / _EPS


def _check_rate(xi):
    if not xi >= 0.0 or math.isinf(xi):
        raise DomainError(f"Poisson rate must be finite and nonnegative, got {xi!r}")


def poisson_log_pmf(xi: float, y: int) -> float:
    """Log-probability ``log Poisson_xi(y) = -xi + y log xi - log y!``.

    ``y!`` and ``xi**y`` are never formed; the factorial goes through
    ``lgamma``. Returns ``-inf`` for impossible outcomes of the degenerate law.
    """
    _check_rate(xi)
    if y < 0 or int(y) != y:
        raise DomainError(f"outcome must be a nonnegative integer, got {y!r}")
    y = int(y)
    if xi == 0.0:
        return 0.0 if y == 0 else -math.inf
    if y == 0:
        return -xi
    return -xi + y * math.log(xi) - math.lgamma(y + 1.0)


def poisson_log_pmf_array(xi: float, ys) -> np.ndarray:
    """Vectorised :func:`poisson_log_pmf` over an integer array ``ys``."""
    _check_rate(xi)
    ys = np.asarray(ys)
    if ys.size and ys.min() < 0:
        raise DomainError("outcomes must be nonnegative")
    yf = ys.astype(np.float64)
    if xi == 0.0:
        return np.where(ys == 0, 0.0, -np.inf)
    return -xi + yf * math.log(xi) - gammaln(yf + 1.0)


def _head_mass(xi, n):
    # sum_{y<n} Poisson_xi(y), exact-rounded via fsum
    return math.fsum(math.exp(v) for v in poisson_log_pmf_array(xi, np.arange(n)))


def _tail_direct(xi, n):
    # terms decrease geometrically once y > xi; stop when they stop mattering
    logt = poisson_log_pmf(xi, n)
    if logt == -math.inf:
        return 0.0
    terms = []
    y = n
    while True:
        t = math.exp(logt)
        terms.append(t)
        if t <= _EPS * 1e-3 * terms[0] or t == 0.0:
            break
        y += 1
        logt += math.log(xi) - math.log(y)
    return math.fsum(terms)


def poisson_tail(xi: float, n: int) -> float:
    """Tail mass ``sum_{y >= n} Poisson_xi(y)``.

    For ``n <= xi + 1`` this is ``1 - head`` with the head summed in the log
    domain and compensated; beyond the mode the tail is summed directly so
    that small tails keep their relative accuracy.
    """
    _check_rate(xi)
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    if n == 0:
        return 1.0
    if xi == 0.0:
        return 0.0
    if n <= xi + 1.0:
        return min(1.0, max(0.0, 1.0 - _head_mass(xi, n)))
    return min(1.0, _tail_direct(xi, n))


def truncation_point(xi: float, tol: float = 1e-15) -> int:
    """Smallest ``Y`` (searched down from a conservative cutoff) such that the
    mass above ``Y`` is at most ``tol``."""
    _check_rate(xi)
    if xi == 0.0:
        return 0
    top = int(math.ceil(xi + 10.0 * math.sqrt(xi + 1.0) + 50.0))
    while poisson_tail(xi, top + 1) > tol:
        top *= 2
    lo, hi = int(math.floor(xi)), top
    # tail(y+1) is nonincreasing in y: bisect for the first y meeting tol
    while lo < hi:
        mid = (lo + hi) // 2
        if poisson_tail(xi, mid + 1) <= tol:
            hi = mid
        else:
            lo = mid + 1
    return hi


def _lower_gamma_series(a, x, tol=1e-16, max_iter=10_000):
    # gamma(a, x) = e^{-x} x^a sum_n x^n / (a (a+1) ... (a+n))
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(max_iter):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * tol:
            break
    else:
        raise ArithmeticError(f"series for gamma({a}, {x}) did not converge")
    return total * math.exp(-x + a * math.log(x))


def _upper_gamma_cf(a, x, tol=1e-16, max_iter=10_000):
    # modified Lentz evaluation of the Legendre continued fraction
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            break
    else:
        raise ArithmeticError(f"continued fraction for Gamma({a}, {x}) did not converge")
    return math.exp(-x + a * math.log(x)) * h


def upper_incomplete_gamma(a: float, xi: float) -> float:
    """Upper incomplete gamma ``Gamma(a, xi) = int_xi^inf t^(a-1) e^(-t) dt``.

    Uses the power series for the lower function when ``xi < a + 1`` and the
    continued fraction otherwise.
    """
    if not a > 0.0:
        raise DomainError(f"shape a must be positive, got {a!r}")
    if not xi >= 0.0:
        raise DomainError(f"xi must be nonnegative, got {xi!r}")
    if xi == 0.0:
        return math.gamma(a)
    if math.isinf(xi):
        return 0.0
    if xi < a + 1.0:
        return math.gamma(a) - _lower_gamma_series(a, xi)
    return _upper_gamma_cf(a, xi)


def log_sum_exp(values) -> float:
    """``log(sum(exp(values)))`` with max-shift; ``-inf`` entries drop out."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise DomainError("log_sum_exp of an empty sequence")
    m = v.max()
    if m == -np.inf:
        return -math.inf
    if m == np.inf:
        return math.inf
    return float(m + math.log(math.fsum(np.exp(v - m))))
