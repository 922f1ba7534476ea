"""The Poisson channel ``W(y|x) = Poisson_{lambda + x}(y)``, divergences between
Poisson laws and exact mutual information of finite-support inputs."""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .special_fn import poisson_log_pmf_array, truncation_point

__all__ = [
    "ChannelScenario",
    "DiscreteInput",
    "BinaryInput",
    "kl_poisson",
    "mutual_information",
    "mutual_information_terms",
    "i0",
    "i1",
]

TOL_TAIL = 1e-15


@dataclass(frozen=True)
class ChannelScenario:
    """Dark current plus average/peak power constraints.

    ``dark_kind`` is ``"constant"`` (``dark_value`` is lambda) or
    ``"proportional"`` (``dark_value`` is c, lambda = c * E). ``peak_power`` may
    be ``math.inf``.
    """

    dark_kind: str
    dark_value: float
    avg_power: float
    peak_power: float = math.inf

    def __post_init__(self):
        if self.dark_kind not in ("constant", "proportional"):
            raise DomainError(f"unknown dark-current kind {self.dark_kind!r}")
        if not self.dark_value >= 0.0 or math.isinf(self.dark_value):
            raise DomainError("dark-current parameter must be finite and >= 0")
        if not self.avg_power > 0.0 or math.isinf(self.avg_power):
            raise DomainError("average power must be finite and > 0")
        if not self.peak_power > 0.0:
            raise DomainError("peak power must be > 0 (use math.inf for no peak constraint)")

    @classmethod
    def constant(cls, lam, avg_power, peak_power=math.inf):
        return cls("constant", float(lam), float(avg_power), float(peak_power))

    @classmethod
    def proportional(cls, c, avg_power, peak_power=math.inf):
        return cls("proportional", float(c), float(avg_power), float(peak_power))

    @property
    def dark_current(self) -> float:
        if self.dark_kind == "constant":
            return self.dark_value
        return self.dark_value * self.avg_power

    @property
    def peak_limited(self) -> bool:
        return math.isfinite(self.peak_power)

    def with_avg_power(self, avg_power):
        return ChannelScenario(self.dark_kind, self.dark_value, float(avg_power), self.peak_power)


@dataclass(frozen=True)
class DiscreteInput:
    """Finite-support input law. Duplicate levels are merged and zero-probability
    levels dropped on construction; levels are stored sorted."""

    levels: np.ndarray
    probs: np.ndarray = field(repr=False)

    def __init__(self, levels, probs):
        x = np.asarray(levels, dtype=np.float64).ravel()
        w = np.asarray(probs, dtype=np.float64).ravel()
        if x.shape != w.shape or x.size == 0:
            raise DomainError("levels and probs must be nonempty and of equal length")
        if np.any(x < 0) or not np.all(np.isfinite(x)):
            raise DomainError("input levels must be finite and nonnegative")
        if np.any(w < 0):
            raise DomainError("probabilities must be nonnegative")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise DomainError(f"probabilities sum to {math.fsum(w)!r}, not 1")
        keep = w > 0
        ux, inv = np.unique(x[keep], return_inverse=True)
        uw = np.zeros(ux.size)
        np.add.at(uw, inv, w[keep])
        object.__setattr__(self, "levels", ux)
        object.__setattr__(self, "probs", uw)

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        return cls([x for x, _ in pairs], [w for _, w in pairs])

    def mean(self) -> float:
        return math.fsum(self.levels * self.probs)

    def satisfies(self, scenario: ChannelScenario, rtol: float = 0.0) -> bool:
        """True when both power constraints of ``scenario`` hold."""
        if scenario.peak_limited and self.levels.max() > scenario.peak_power * (1 + rtol):
            return False
        return self.mean() <= scenario.avg_power * (1 + rtol)


@dataclass(frozen=True)
class BinaryInput:
    """On-off keying: level 0 w.p. ``1 - p`` and level ``zeta`` w.p. ``p``."""

    zeta: float
    p: float

    def __post_init__(self):
        if not self.zeta > 0.0 or math.isinf(self.zeta):
            raise DomainError(f"on-level zeta must be positive and finite, got {self.zeta!r}")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"on-probability must lie in (0, 1), got {self.p!r}")

    @property
    def average_power(self) -> float:
        return self.p * self.zeta

    def to_discrete(self) -> DiscreteInput:
        return DiscreteInput([0.0, self.zeta], [1.0 - self.p, self.p])


def _check_rate(v, name):
    if not v >= 0.0 or math.isinf(v):
        raise DomainError(f"{name} must be finite and nonnegative, got {v!r}")


def kl_poisson(alpha: float, beta: float) -> float:
    """``D(Poisson_alpha || Poisson_beta) = alpha log(alpha/beta) - alpha + beta``
    in nats, with ``0 log 0 = 0`` and ``+inf`` when ``beta == 0 < alpha``."""
    _check_rate(alpha, "alpha")
    _check_rate(beta, "beta")
    if alpha == 0.0:
        return float(beta)
    if beta == 0.0:
        return math.inf
    # beta * (t log t - t + 1), t = alpha / beta; log1p keeps t near 1 accurate
    t = alpha / beta
    return beta * (t * math.log1p(t - 1.0) - (t - 1.0)) if abs(t - 1.0) < 0.5 else (
        alpha * math.log(t) - alpha + beta
    )


def _as_discrete(inp):
    if isinstance(inp, BinaryInput):
        return inp.to_discrete()
    if isinstance(inp, DiscreteInput):
        return inp
    raise DomainError(f"expected DiscreteInput or BinaryInput, got {type(inp).__name__}")


def mutual_information_terms(inp, lam: float, tol_tail: float = TOL_TAIL) -> np.ndarray:
    """Per-output contributions ``sum_i p_i W_i(y) log(W_i(y) / P_Y(y))`` for
    ``y = 0..Y``, where the neglected mass of every row beyond ``Y`` is at most
    ``tol_tail``."""
    _check_rate(lam, "dark current")
    d = _as_discrete(inp)
    xs, ps = d.levels, d.probs
    n_y = truncation_point(lam + xs.max(), tol_tail) + 1
    ys = np.arange(n_y)
    logW = np.stack([poisson_log_pmf_array(lam + x, ys) for x in xs])  # (k, n_y)
    W = np.exp(logW)
    k = xs.size
    if k == 1:
        return np.zeros(n_y)

    # u[i, y] = log(P_Y(y) / W_i(y)) = log sum_j p_j exp(logW_j - logW_i)
    with np.errstate(invalid="ignore"):
        delta = logW[None, :, :] - logW[:, None, :]  # (i, j, y)
    live = np.isfinite(logW)  # W_i(y) > 0
    delta = np.where(live[:, None, :], delta, 0.0)
    pj = ps[None, :, None]
    with np.errstate(over="ignore", invalid="ignore"):
        near = (pj * np.expm1(np.minimum(delta, 0.5))).sum(axis=1)
        u_near = np.log1p(near)
        dmax = delta.max(axis=1, keepdims=True)
        u_far = dmax[:, 0, :] + np.log((pj * np.exp(delta - dmax)).sum(axis=1))
    small = delta.max(axis=1) <= 0.5
    u = np.where(small, u_near, u_far)
    contrib = np.where(live, -ps[:, None] * W * u, 0.0)
    return contrib.sum(axis=0)


def mutual_information(inp, lam: float, tol_tail: float = TOL_TAIL) -> float:
    """``I(X;Y)`` in nats for a finite-support input and dark current ``lam``.

    Computed as ``sum_i p_i D(W(.|x_i) || P_Y)`` rather than as an entropy
    difference, so tiny rates (around 1e-7 nats) keep their relative accuracy.
    """
    terms = mutual_information_terms(inp, lam, tol_tail)
    return max(0.0, math.fsum(terms))


def _binary_args(lam, zeta, p):
    _check_rate(lam, "dark current")
    if not zeta > 0.0:
        raise DomainError(f"zeta must be positive, got {zeta!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")


def i0(lam: float, zeta: float, p: float) -> float:
    """The ``y = 0`` part of the on-off mutual information, evaluated exactly as

    ``-m log m - (1-p) lam e^-lam - p (lam+zeta) e^-(lam+zeta)`` with
    ``m = (1-p) e^-lam + p e^-(lam+zeta)``.
    """
    _binary_args(lam, zeta, p)
    m = (1.0 - p) * math.exp(-lam) + p * math.exp(-(lam + zeta))
    return (
        -m * math.log(m)
        - (1.0 - p) * lam * math.exp(-lam)
        - p * (lam + zeta) * math.exp(-(lam + zeta))
    )


def i1(lam: float, zeta: float, p: float, tol_tail: float = TOL_TAIL) -> float:
    """The ``y >= 1`` part of the on-off mutual information (truncated series)."""
    _binary_args(lam, zeta, p)
    terms = mutual_information_terms(BinaryInput(zeta, p), lam, tol_tail)
    return math.fsum(terms[1:])
