"""Capacity oracle: Blahut-Arimoto on a discretised input alphabet.

The peak constraint is enforced by the support of the input grid. The
average-power constraint is handled through the Lagrangian
``max_r I(r) - s E_r[X]``: each fixed ``s`` is a cost-weighted Blahut-Arimoto
run, and an outer bisection on ``s`` drives ``E[X]`` onto the target.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bounds_upper import default_x_max, input_grid
from .channel import ChannelScenario, DiscreteInput
from .errors import ConvergenceError, DomainError
from .special_fn import truncation_point

__all__ = ["SolverConfig", "CapacityResult", "solve_capacity", "default_ba_tol", "duality_upper"]

log = logging.getLogger(__name__)

# floor used when warm-starting so that no level is frozen at zero mass
_WARM_FLOOR = 1e-30
# mass on the cap of an infinite-peak grid above which the cap is suspect
EDGE_MASS = 1e-6


def default_ba_tol(E: float) -> float:
    """1e-9 nats down to E = 1e-4, then 1e-3 * E."""
    return 1e-9 if E >= 1e-4 else 1e-3 * E


@dataclass(frozen=True)
class SolverConfig:
    grid_size: int = 200
    x_max: float | None = None
    y_tail_tol: float = 1e-15
    ba_tol: float | None = None
    max_iters: int = 2_000_000
    bisect_tol: float = 1e-6
    max_bisect: int = 200

    def __post_init__(self):
        if self.grid_size < 2:
            raise DomainError("grid_size must be >= 2")
        if self.x_max is not None and not self.x_max > 0:
            raise DomainError("x_max must be positive")
        if not 0 < self.y_tail_tol < 1:
            raise DomainError("y_tail_tol must lie in (0, 1)")
        if self.ba_tol is not None and not self.ba_tol >= 1e-12:
            raise DomainError("ba_tol must be >= 1e-12")
        if self.max_iters < 1 or self.max_bisect < 1:
            raise DomainError("iteration limits must be positive")
        if not self.bisect_tol > 0:
            raise DomainError("bisect_tol must be positive")


@dataclass(frozen=True)
class CapacityResult:
    """Outcome of :func:`solve_capacity`.

    ``capacity`` is ``I(r)`` of the returned grid input, which meets both
    constraints (average power up to ``bisect_tol`` relative). ``upper`` is
    the duality certificate ``min_s max_x (D_x - s x) + s E`` built from the
    output law of that input, so ``capacity <= C_grid <= upper``, and
    ``gap = upper - capacity``.
    """

    capacity: float
    input: DiscreteInput
    multiplier: float
    gap: float
    iterations: int
    upper: float
    avg_power: float
    ba_tol: float
    monotone: bool
    history: np.ndarray = field(repr=False)
    output_pmf: np.ndarray = field(repr=False)
    warnings: tuple = ()


def _is_monotone(history):
    if history.size < 2:
        return True
    slack = 64 * np.finfo(float).eps * np.maximum(1.0, np.abs(history[1:]))
    return bool(np.all(np.diff(history) >= -slack))


def solve_capacity(scenario: ChannelScenario, config: SolverConfig | None = None) -> CapacityResult:
    """Capacity of the Poisson channel in ``scenario`` on a grid of input levels."""
    cfg = config or SolverConfig()
    lam = scenario.dark_current
    E = scenario.avg_power
    top = scenario.peak_power if scenario.peak_limited else (cfg.x_max or default_x_max(lam, E))
    tol = cfg.ba_tol if cfg.ba_tol is not None else default_ba_tol(E)

    xs = input_grid(top, cfg.grid_size)
    n_y = truncation_point(lam + top, cfg.y_tail_tol) + 1
    logW = kernels.log_pmf_matrix(lam + xs, n_y)
    W = np.exp(logW)

    total_iters = 0
    all_monotone = True

    def run(s, r0, tol_run):
        nonlocal total_iters, all_monotone
        r0 = np.maximum(r0, _WARM_FLOOR)
        r0 = r0 / r0.sum()
        r, D, gap, iters, hist = kernels.ba_solve(W, logW, xs, float(s), r0, tol_run, cfg.max_iters)
        total_iters += int(iters)
        all_monotone &= _is_monotone(hist)
        if gap > tol_run:
            raise ConvergenceError(
                f"Blahut-Arimoto stopped after {iters} evaluations at s={s:.6g} "
                f"with gap {gap:.3e} > {tol_run:.3e}",
                float(gap),
            )
        return r, D, float(gap), np.asarray(hist)

    excess = lambda res: float(res[0] @ xs) - E  # noqa: E731
    slack = cfg.bisect_tol * E
    uniform = np.full(xs.size, 1.0 / xs.size)

    if top <= E:
        # every input on the grid meets the average constraint
        s, best = 0.0, run(0.0, uniform, tol)
    else:
        # loose pass locates the multiplier; multipliers far from the root
        # need far fewer evaluations when the gap target is relaxed
        tol_loose = max(tol, 1e-3 * E)
        br = _bracket(run, excess, slack, uniform, tol_loose)
        if br is None:
            s, best = 0.0, run(0.0, uniform, tol)
            if excess(best) > slack:
                br = _bracket(run, excess, slack, best[0], tol)
        if br is not None:
            br = _illinois(run, excess, slack, *br, tol_loose, rel_width=1e-2)
            br = _tighten(run, excess, slack, *br, tol)
            # narrow the bracket fully so both ends sit on one optimal face
            s_lo, lo, s_hi, hi = _illinois(run, excess, 0.0, *br, tol, rel_width=1e-12)
            s, best = s_hi, hi
            if excess(lo) > 0.0 and excess(hi) < 0.0:
                best = _mix_to_target(W, logW, xs, E, lo, hi)
    r, D, _, hist = best

    capacity = max(0.0, math.fsum(r * D))
    avg = float(r @ xs)
    upper = max(capacity, duality_upper(D, xs, E))
    gap = upper - capacity
    warns = []
    if not scenario.peak_limited and r[-1] > EDGE_MASS:
        msg = f"optimal mass {r[-1]:.3e} on the grid cap x_max={top:.6g}; raise x_max"
        log.warning(msg)
        warns.append("GRID_EDGE_MASS")
    if not all_monotone:
        warns.append("BA_NOT_MONOTONE")
    keep = r > 0
    total = math.fsum(r[keep])
    inp = DiscreteInput(xs[keep], r[keep] / total)
    return CapacityResult(
        capacity=capacity,
        input=inp,
        multiplier=float(s),
        gap=gap,
        iterations=total_iters,
        upper=upper,
        avg_power=avg,
        ba_tol=tol,
        monotone=all_monotone,
        history=hist,
        output_pmf=r @ W,
        warnings=tuple(warns),
    )


def _bracket(run, excess, slack, r0, tol_run, s_min=1e-8):
    """``(s_lo, lo, s_hi, hi)`` with ``excess(lo) > slack >= excess(hi)``, or
    ``None`` when even ``s_min`` is feasible (the constraint may be inactive)."""
    s = 1.0
    res = run(s, r0, tol_run)
    if excess(res) > slack:
        s_lo, lo = s, res
        while True:
            s *= 2.0
            res = run(s, lo[0], tol_run)
            if excess(res) <= slack:
                return s_lo, lo, s, res
            s_lo, lo = s, res
    s_hi, hi = s, res
    while s > s_min:
        s *= 0.5
        res = run(s, hi[0], tol_run)
        if excess(res) > slack:
            return s, res, s_hi, hi
        s_hi, hi = s, res
    return None


def _illinois(run, excess, slack, s_lo, lo, s_hi, hi, tol_run, rel_width):
    """Illinois regula falsi on ``excess(s)`` inside ``[s_lo, s_hi]``,
    safeguarded by bisection. Stops once ``hi`` is within ``slack`` of the
    target or the bracket is ``rel_width`` narrow."""
    f_lo, f_hi = excess(lo), excess(hi)
    side = 0
    for _ in range(400):
        if -f_hi <= slack or s_hi - s_lo <= rel_width * s_hi:
            break
        s_new = (s_lo * f_hi - s_hi * f_lo) / (f_hi - f_lo)
        width = s_hi - s_lo
        if not s_lo + 0.01 * width < s_new < s_hi - 0.01 * width:
            s_new = 0.5 * (s_lo + s_hi)
        mid = run(s_new, hi[0], tol_run)
        f_mid = excess(mid)
        if f_mid > slack:
            s_lo, lo, f_lo = s_new, mid, f_mid
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            s_hi, hi, f_hi = s_new, mid, f_mid
            if side == 1:
                f_lo *= 0.5
            side = 1
    return s_lo, lo, s_hi, hi


def _tighten(run, excess, slack, s_lo, lo, s_hi, hi, tol_run):
    """Re-solve both bracket ends at ``tol_run``; widen until the signs hold.

    Only the first tight run starts from a loose iterate. Every later run is
    warm-started from the latest tight solution, which lies much closer to the
    optimum at a nearby multiplier.
    """
    hi = run(s_hi, hi[0], tol_run)
    while excess(hi) > slack:
        s_lo, lo = s_hi, hi
        s_hi *= 1.5
        hi = run(s_hi, hi[0], tol_run)
    warm = hi[0]
    while True:
        lo = run(s_lo, warm, tol_run)
        if excess(lo) > slack or s_lo == 0.0:
            break
        s_hi, hi = s_lo, lo
        warm = lo[0]
        s_lo = s_lo / 1.5 if s_lo > 1e-8 else 0.0
    return s_lo, lo, s_hi, hi


def duality_upper(D, xs, E):
    """``min_{s >= 0} max_x (D_x - s x) + s E``, computed exactly.

    ``D_x = D(W_x || q)`` for any output law ``q`` bounds the gridded capacity
    under ``E[X] <= E`` from above. The minimum over ``s`` equals the upper
    concave envelope of the points ``(x, D_x)`` evaluated at ``E``, capped by
    levels at or below ``E``, which a scan over straddling pairs finds.
    """
    below = xs <= E
    best = float(D[below].max()) if below.any() else -math.inf
    above = ~below
    if below.any() and above.any():
        xi, di = xs[below][:, None], D[below][:, None]
        xj, dj = xs[above][None, :], D[above][None, :]
        w = (xj - E) / (xj - xi)
        best = max(best, float(np.max(w * di + (1.0 - w) * dj)))
    return best


def _mix_to_target(W, logW, xs, E, lo, hi):
    """Mix the two bracket solutions so that ``E[X] == E``.

    ``I`` is concave in the input law, so the mixture does at least as well as
    the interpolation of its ends.
    """
    e_lo, e_hi = float(lo[0] @ xs), float(hi[0] @ xs)
    if e_lo <= e_hi:
        return hi
    theta = (E - e_hi) / (e_lo - e_hi)
    theta = min(max(theta, 0.0), 1.0)
    r = theta * lo[0] + (1.0 - theta) * hi[0]
    logq = np.log(np.maximum(r @ W, 1e-300))
    D = kernels.kl_rows(W, logW, logq)
    return r, D, math.nan, hi[3]
