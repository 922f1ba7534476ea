"""Kernel bodies written in the numpy subset numba compiles.

``_numpy`` exposes these functions as they are; ``_numba`` wraps the same
functions with ``njit``, so both backends run one algorithm.
"""
import math

import numpy as np

_TINY = 1e-300
# accepted step multiplies the relaxation factor by this; a rejected one halves it
_GROW = 1.1
PRUNE_EVERY = 25
_MAX_HALVINGS = 60
# levels holding less than this fraction of the largest mass stay out of the
# Newton system
_NEWTON_SUPPORT = 1e-6
# thresholds tried per pruning round
_PRUNE_LADDER = 12
# pruned levels keep this mass: the optimum may hold far levels at masses
# like e^-40 that only the multiplicative update can grow back to
_PRUNE_FLOOR = 1e-30
# damped Newton steps shorter than 2**-_NEWTON_HALVINGS are not tried
_NEWTON_HALVINGS = 8
# singular values of the Newton system below this fraction are dropped
_NEWTON_RCOND = 1e-8


def log_pmf_matrix(rates, n_y):
    """``out[i, y] = log Poisson_{rates[i]}(y)`` for ``y < n_y``; ``-inf`` marks
    impossible outcomes of a zero rate."""
    n_x = rates.shape[0]
    lfact = np.empty(n_y)
    for y in range(n_y):
        lfact[y] = math.lgamma(y + 1.0)
    out = np.empty((n_x, n_y))
    for i in range(n_x):
        lam = rates[i]
        if lam == 0.0:
            out[i, :] = -np.inf
            out[i, 0] = 0.0
        else:
            ll = math.log(lam)
            for y in range(n_y):
                out[i, y] = -lam + y * ll - lfact[y]
    return out


def kl_rows(W, logW, logq):
    """``D[i] = sum_y W[i, y] (logW[i, y] - logq[y])`` over ``W > 0``; an
    output with ``logq = -inf`` under a positive ``W`` gives ``+inf``."""
    n_x = W.shape[0]
    D = np.empty(n_x)
    for i in range(n_x):
        live = W[i] > 0.0
        D[i] = np.sum(W[i][live] * (logW[i][live] - logq[live]))
    return D


def _evaluate(W, safe, cost, s, r):
    q = r @ W
    logq = np.log(np.maximum(q, _TINY))
    D = (W * (safe - logq)).sum(axis=1)
    t = D - s * cost
    return D, t, t.max(), float(np.dot(r, t))


def _newton_direction(W, r, t):
    """Newton direction for the objective restricted to the levels that
    carry mass, on the plane ``sum(r) = 1``; zero elsewhere.

    The Hessian of ``I(r)`` is ``-sum_y W_x(y) W_z(y) / q(y)``. The system is
    solved in the least-squares sense because neighbouring rows of a fine
    grid are close to collinear.
    """
    S = np.nonzero(r > _NEWTON_SUPPORT * r.max())[0]
    n = S.shape[0]
    d = np.zeros(r.shape[0])
    if n < 2:
        return d
    q = np.maximum(r @ W, _TINY)
    WS = W[S]
    kkt = np.zeros((n + 1, n + 1))
    kkt[:n, :n] = -(WS / q) @ WS.T
    kkt[:n, n] = 1.0
    kkt[n, :n] = 1.0
    rhs = np.zeros(n + 1)
    rhs[:n] = -t[S]
    sol = np.linalg.lstsq(kkt, rhs, _NEWTON_RCOND)[0]
    d[S] = sol[:n]
    return d


def ba_solve(W, logW, cost, s, r0, tol, max_iter):
    """Blahut-Arimoto for ``max_r I(r) - s E_r[cost]``.

    Plain multiplicative updates ``r <- r exp(mu (t - max t))`` with an
    adaptive relaxation ``mu >= 1``. A step with ``mu > 1`` is kept only if the
    objective does not drop, otherwise ``mu`` is halved down to the plain
    update. Every ``PRUNE_EVERY`` evaluations, levels with ``t_x`` below the
    objective are pruned to a tiny floor (kept only if the objective rises), a line search
    along the Frank-Wolfe direction toward ``argmax t`` moves mass onto the
    best level, and a damped Newton step on the support balances mass between
    neighbouring levels, where the multiplicative update is slowest. Stops
    when ``gap = max_x t_x - objective <= tol``.

    Returns ``(r, D, gap, evaluations, history)`` where ``history`` holds the
    objective ``I - s E[cost]`` of every accepted iterate (nondecreasing).
    """
    safe = np.where(W > 0.0, logW, 0.0)
    r = r0.copy()
    # a polishing round may overrun max_iter by its line-search evaluations
    history = np.empty(max_iter + 2 * _MAX_HALVINGS + 8)
    D, t, m, lagr = _evaluate(W, safe, cost, s, r)
    history[0] = lagr
    n_hist = 1
    evals = 1
    mu = 1.0
    gap = m - lagr
    next_polish = PRUNE_EVERY
    while evals < max_iter and gap > tol:
        if evals >= next_polish:
            next_polish = evals + PRUNE_EVERY
            # prune the levels lying more than delta below the objective,
            # trying the largest such set first; dropping level x changes the
            # objective by r_x (objective - t_x) to first order
            live = r > 1e3 * _PRUNE_FLOOR
            spread = lagr - np.min(np.where(live, t, lagr))
            delta = 0.0
            for _ in range(_PRUNE_LADDER):
                drop = live & (t < lagr - delta)
                if drop.any() and not drop.all():
                    rp = np.where(drop, _PRUNE_FLOOR, r)
                    rp = rp / rp.sum()
                    Dp, tp, mp, lp = _evaluate(W, safe, cost, s, rp)
                    evals += 1
                    if lp >= lagr:
                        r, D, t, m, lagr = rp, Dp, tp, mp, lp
                        history[n_hist] = lagr
                        n_hist += 1
                        break
                delta = spread * 2.0**-10 if delta == 0.0 else delta * 2.0
                if delta >= spread:
                    break
            # Frank-Wolfe step toward the best level: the objective is concave
            # along (1 - eps) r + eps e_k, so scan eps downward past the peak
            k = int(np.argmax(t))
            base = r
            best = lagr
            eps = 0.5
            for _ in range(_MAX_HALVINGS):
                rp = (1.0 - eps) * base
                rp[k] += eps
                Dp, tp, mp, lp = _evaluate(W, safe, cost, s, rp)
                evals += 1
                if lp > best:
                    r, D, t, m, best = rp, Dp, tp, mp, lp
                elif best > lagr:
                    break
                eps *= 0.5
            if best > lagr:
                lagr = best
                history[n_hist] = lagr
                n_hist += 1
            d = _newton_direction(W, r, t)
            step = 1.0
            for _ in range(_NEWTON_HALVINGS):
                rp = np.maximum(r + step * d, 0.0)
                rp = rp / rp.sum()  # exact up to rounding
                Dp, tp, mp, lp = _evaluate(W, safe, cost, s, rp)
                evals += 1
                if lp > lagr:
                    r, D, t, m, lagr = rp, Dp, tp, mp, lp
                    history[n_hist] = lagr
                    n_hist += 1
                    break
                step *= 0.5
            next_polish = evals + PRUNE_EVERY
            gap = m - lagr
            if gap <= tol or evals >= max_iter:
                break
        while True:
            rn = r * np.exp(mu * (t - m))
            rn = rn / rn.sum()
            Dn, tn, mn, ln = _evaluate(W, safe, cost, s, rn)
            evals += 1
            if ln >= lagr or mu == 1.0:
                break
            mu = max(1.0, 0.5 * mu)
        r, D, t, m, lagr = rn, Dn, tn, mn, ln
        history[n_hist] = lagr
        n_hist += 1
        gap = m - lagr
        mu *= _GROW
    return r, D, gap, evals, history[:n_hist]
