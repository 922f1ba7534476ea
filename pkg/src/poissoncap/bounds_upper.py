"""Converse bounds via the duality bound ``C <= sup E[D(W(.|X) || R)]``.

Closed forms for the zero-dark-current (gamma-tail output law) and
constant-dark-current (Poisson head, geometric tail) cases, the capacity per
unit cost under a peak constraint, the pure-loss bosonic reference curve, and
a numeric Lagrangian evaluator that turns any output law into a bound.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import errors, kernels
from .errors import BoundValidityError, DomainError
from .special_fn import poisson_log_pmf_array, poisson_tail, truncation_point, upper_incomplete_gamma

__all__ = [
    "BoundReport",
    "GammaMixtureLaw",
    "HeadTailLaw",
    "DiscreteLaw",
    "upper_zero",
    "upper_zero_scheduled",
    "upper_dark",
    "upper_dark_scheduled",
    "capacity_per_unit_cost",
    "bosonic_capacity",
    "duality_bound_lagrangian",
    "default_x_max",
    "input_grid",
]

_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class BoundReport:
    """A bound value in nats with the parameters that produced it."""

    name: str
    kind: str  # "lower", "upper" or "oracle"
    value: float
    params: dict = field(default_factory=dict)
    valid: bool = True
    flags: tuple = ()


# ---------------------------------------------------------------- output laws


@dataclass(frozen=True)
class GammaMixtureLaw:
    """Density on the continuous output ``[0, inf)``: ``1 - p`` on ``[0, 1)`` and
    ``p t^(nu-1) e^(-t/beta) / (beta^nu Gamma(nu, 1/beta))`` for ``t >= 1``."""

    p: float
    nu: float = 0.5
    beta: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError("p must lie in (0, 1)")
        if not 0.0 < self.nu <= 1.0:
            raise DomainError("nu must lie in (0, 1]")
        if not self.beta > 0.0:
            raise DomainError("beta must be positive")

    def cell_log_weights(self, n_y):
        """``int_y^{y+1} log f(t) dt`` for ``y < n_y``.

        With the continuous-output channel (density ``Poisson(floor t)``) the
        divergence from row ``x`` is ``sum_y W_x(y) (log W_x(y) - g(y))``.
        """
        y = np.arange(n_y, dtype=np.float64)
        g = np.empty(n_y)
        g[0] = math.log1p(-self.p)
        if n_y > 1:
            yy = y[1:]
            # int_y^{y+1} log t dt
            int_log = (yy + 1.0) * np.log(yy + 1.0) - yy * np.log(yy) - 1.0
            const = (
                math.log(self.p)
                - self.nu * math.log(self.beta)
                - math.log(upper_incomplete_gamma(self.nu, 1.0 / self.beta))
            )
            g[1:] = const + (self.nu - 1.0) * int_log - (yy + 0.5) / self.beta
        return g

    def total_mass(self):
        """Integral of the density, by quadrature of the tail."""
        norm = self.beta**self.nu * upper_incomplete_gamma(self.nu, 1.0 / self.beta)
        tail, _ = quad(
            lambda t: t ** (self.nu - 1.0) * math.exp(-t / self.beta), 1.0, math.inf, epsabs=0, epsrel=1e-13
        )
        return (1.0 - self.p) + self.p * tail / norm


@dataclass(frozen=True)
class HeadTailLaw:
    """Poisson(``lam``) on ``{0..N-1}``; ``delta (1-p) p^(y-N)`` on ``y >= N``,
    with ``delta`` the Poisson(``lam``) mass on ``y >= N``."""

    lam: float
    N: int
    p: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise DomainError("HeadTailLaw needs a positive dark current")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError("N must be a positive integer")
        if not 0.0 < self.p < 1.0:
            raise DomainError("p must lie in (0, 1)")

    @property
    def delta(self):
        return poisson_tail(self.lam, int(self.N))

    def head_mass(self):
        return math.fsum(np.exp(poisson_log_pmf_array(self.lam, np.arange(int(self.N)))))

    def cell_log_weights(self, n_y):
        N = int(self.N)
        y = np.arange(n_y)
        g = poisson_log_pmf_array(self.lam, y)
        tail = y >= N
        g[tail] = math.log(self.delta) + math.log1p(-self.p) + (y[tail] - N) * math.log(self.p)
        return g


@dataclass(frozen=True)
class DiscreteLaw:
    """An explicit output pmf on ``{0..len-1}``, zero beyond."""

    log_pmf: np.ndarray

    @classmethod
    def from_pmf(cls, pmf):
        pmf = np.asarray(pmf, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return cls(np.log(pmf))

    def cell_log_weights(self, n_y):
        out = np.full(n_y, -np.inf)
        k = min(n_y, self.log_pmf.size)
        out[:k] = self.log_pmf[:k]
        return out


# --------------------------------------------------------------- closed forms


def _gamma_tail_penalty(beta):
    # (1/2) log beta + log(Gamma(1/2, 1/beta) / sqrt(pi)) + 1/(2 beta)
    return (
        0.5 * math.log(beta)
        + math.log(upper_incomplete_gamma(0.5, 1.0 / beta) / _SQRT_PI)
        + 0.5 / beta
    )


def upper_zero(E: float, p: float, beta: float) -> float:
    """Upper bound on the zero-dark-current capacity, any peak constraint:

    ``E log(1/p) + log(1/(1-p)) + E/beta + E max{0, (1/2) log beta
    + log(Gamma(1/2, 1/beta)/sqrt(pi)) + 1/(2 beta)}``.
    """
    if not E > 0.0:
        raise DomainError(f"E must be > 0, got {E!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if not beta > 0.0:
        raise DomainError(f"beta must be > 0, got {beta!r}")
    return (
        -E * math.log(p)
        - math.log1p(-p)
        + E / beta
        + E * max(0.0, _gamma_tail_penalty(beta))
    )


def _golden_min(f, lo, hi, tol=1e-10, max_iter=200):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def upper_zero_scheduled(E: float, beta: float = 1.0, beta_search: bool = False) -> BoundReport:
    """:func:`upper_zero` with ``p = E / (1 + E)``.

    With ``beta_search`` the bound is minimised over ``log beta in [-5, 5]`` by
    golden section, guarded by a 201-point scan in case the objective is not
    unimodal.
    """
    if not E > 0.0:
        raise DomainError(f"E must be > 0, got {E!r}")
    p = E / (1.0 + E)
    flags = ()
    if beta_search:
        f = lambda lb: upper_zero(E, p, math.exp(lb))  # noqa: E731
        lb, val = _golden_min(f, -5.0, 5.0)
        scan = np.linspace(-5.0, 5.0, 201)
        vals = [f(s) for s in scan]
        k = int(np.argmin(vals))
        if vals[k] < val:
            lb, val = float(scan[k]), vals[k]
            flags = ("BETA_GRID_FALLBACK",)
        beta = math.exp(lb)
    else:
        val = upper_zero(E, p, beta)
    return BoundReport("upper_zero", "upper", val, {"E": E, "p": p, "beta": beta, "nu": 0.5}, True, flags)


def _check_upper_dark(lam, E, N, p):
    if not lam > 0.0:
        raise DomainError(f"dark current must be > 0, got {lam!r}")
    if not E > 0.0:
        raise DomainError(f"E must be > 0, got {E!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if int(N) != N or N < 2:
        raise BoundValidityError(errors.UPPER_DARK_N_LT_2, f"N must be an integer >= 2, got {N!r}")
    if not N - math.sqrt(N) - lam > 0.0:
        raise BoundValidityError(
            errors.UPPER_DARK_N_TOO_SMALL,
            f"N - sqrt(N) - lambda = {N - math.sqrt(N) - lam:.6g} <= 0 (N={N}, lambda={lam})",
        )


def upper_dark(lam: float, E: float, N: int, p: float) -> float:
    """Upper bound for constant dark current ``lam > 0`` from the head/tail
    output law, valid when ``N - sqrt(N) - lam > 0``."""
    _check_upper_dark(lam, E, N, p)
    N = int(N)
    log_lam = math.log(lam)
    den = N - math.sqrt(N) - lam
    g1 = N * math.log(N) + 1.0 / (12.0 * N) + 0.5 * math.log(2.0 * math.pi * N) - math.log1p(-p)
    t1 = E / den + math.exp(N + N * log_lam - N * math.log(N))
    g2 = 1.0 - math.log(p) + log_lam
    t2 = (
        E
        + lam * E / den
        + lam * math.exp(N - 1 - lam + (N - 1) * log_lam - (N - 1) * math.log(N - 1))
    )
    g3 = E * (1.0 + lam / (N - lam)) * max(0.0, -log_lam)
    g4 = E * N * math.log(N / lam) / (N - lam)
    return g1 * t1 + g2 * t2 + g3 + g4


def _min_valid_N(lam):
    N = 2
    while not N - math.sqrt(N) - lam > 0.0:
        N += 1
    return N


def upper_dark_scheduled(lam: float, E: float, p: float = 0.5) -> BoundReport:
    """:func:`upper_dark` with ``N = floor(log(1/E))``; ``p`` fixed (default 1/2)."""
    if not E > 0.0:
        raise DomainError(f"E must be > 0, got {E!r}")
    N = math.floor(math.log(1.0 / E)) if E < 1.0 else 0
    try:
        val = upper_dark(lam, E, N, p)
    except BoundValidityError as exc:
        if lam > 0.0:
            need = _min_valid_N(lam)
            raise BoundValidityError(
                exc.reason, f"{exc} ; need E <= exp(-{need}) = {math.exp(-need):.6g}"
            ) from None
        raise
    return BoundReport("upper_dark", "upper", val, {"lambda": lam, "E": E, "N": N, "p": p})


def capacity_per_unit_cost(lam: float, A: float) -> float:
    """``(1 + lam/A) log(1 + A/lam) - 1``: the slope ``lim C/E`` under peak ``A``.

    Returns ``+inf`` when ``lam == 0`` or ``A`` is infinite (no finite slope).
    """
    if not lam >= 0.0:
        raise DomainError(f"dark current must be >= 0, got {lam!r}")
    if not A > 0.0:
        raise DomainError(f"peak must be > 0, got {A!r}")
    if lam == 0.0 or math.isinf(A):
        return math.inf
    r = A / lam
    return (1.0 + 1.0 / r) * math.log1p(r) - 1.0


def bosonic_capacity(E: float) -> float:
    """``(1 + E) log(1 + E) - E log E``."""
    if not E > 0.0:
        raise DomainError(f"E must be > 0, got {E!r}")
    return (1.0 + E) * math.log1p(E) - E * math.log(E)


# --------------------------------------------------------- numeric duality


def default_x_max(lam: float, E: float) -> float:
    """Input cap used in place of an infinite peak."""
    return max(10.0, 5.0 * lam, 3.0 * math.log(1.0 / E) if E < 1.0 else 0.0)


def input_grid(top: float, n: int) -> np.ndarray:
    """``n`` equally spaced input levels on ``[0, top]``, both ends included.

    Levels clustered near 0 carry rows nearly identical to ``x = 0`` and stall
    Blahut-Arimoto, so the spacing is uniform.
    """
    if n < 2:
        raise DomainError("grid needs at least two levels")
    return np.linspace(0.0, top, n)


def _default_gamma_grid(E):
    s0 = max(1.0, math.log(1.0 / E)) if E < 1.0 else 1.0
    return np.concatenate(([0.0], np.geomspace(s0 / 100.0, s0 * 100.0, 40)))


def duality_bound_lagrangian(
    lam: float,
    E: float,
    A: float,
    law,
    gamma_grid=None,
    x_grid=None,
    x_max: float | None = None,
    n_x: int = 400,
    tol_tail: float = 1e-15,
    refine: bool = True,
) -> BoundReport:
    """``min_gamma [max_x (D(W(.|x) || R) - gamma x) + gamma E]`` for an output
    law ``R`` exposing ``cell_log_weights(n_y)``.

    The max over ``x`` runs on a grid of ``[0, A]`` (or ``[0, x_max]`` when
    ``A`` is infinite). If the maximiser sits on the cap of an infinite-peak
    grid the report is marked invalid with ``DUALITY_X_EDGE``. With ``refine``
    the best grid multiplier is polished by golden section on the (convex)
    Lagrangian dual.
    """
    if not lam >= 0.0 or not E > 0.0 or not A > 0.0:
        raise DomainError("need lambda >= 0, E > 0, A > 0")
    if gamma_grid is None:
        gamma_grid = _default_gamma_grid(E)
    gamma_grid = np.asarray(gamma_grid, dtype=np.float64).ravel()
    if gamma_grid.size == 0:
        raise BoundValidityError(errors.EMPTY_GRID, "empty multiplier grid")
    if np.any(gamma_grid < 0):
        raise DomainError("multipliers must be nonnegative")
    capped = math.isinf(A)
    if x_grid is None:
        top = (x_max if x_max is not None else default_x_max(lam, E)) if capped else A
        xs = input_grid(top, n_x)
    else:
        xs = np.asarray(x_grid, dtype=np.float64).ravel()
        if xs.size == 0:
            raise BoundValidityError(errors.EMPTY_GRID, "empty input grid")
    n_y = truncation_point(lam + xs.max(), tol_tail) + 1
    logW = kernels.log_pmf_matrix(lam + xs, n_y)
    W = np.exp(logW)
    D = kernels.kl_rows(W, logW, law.cell_log_weights(n_y))

    def dual(g):
        v = D - g * xs
        k = int(np.argmax(v))
        return v[k] + g * E, k

    vals = [dual(g) for g in gamma_grid]
    j = int(np.argmin([v for v, _ in vals]))
    best_g, (best, k) = float(gamma_grid[j]), vals[j]
    if refine and gamma_grid.size > 1:
        srt = np.sort(gamma_grid)
        i = int(np.searchsorted(srt, best_g))
        lo, hi = srt[max(i - 1, 0)], srt[min(i + 1, srt.size - 1)]
        if hi > lo:
            g, _ = _golden_min(lambda g: dual(g)[0], lo, hi, tol=1e-12 * max(1.0, hi))
            v, kk = dual(g)
            if v < best:
                best_g, best, k = float(g), v, kk
    flags = ()
    valid = True
    if capped and k == xs.size - 1:
        flags = ("DUALITY_X_EDGE",)
        valid = False
    return BoundReport(
        "duality_lagrangian",
        "upper",
        float(best),
        {"lambda": lam, "E": E, "A": A, "gamma": best_g, "x_argmax": float(xs[k]), "law": type(law).__name__},
        valid,
        flags,
    )
