"""Acceptance criteria 1-11.

Each test prints one ``[PASS]`` or ``[FAIL]`` line (also collected into the
pytest terminal summary). Run alone with::

    pytest tests/test_acceptance.py -v
"""
import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES, cached_solve
from scipy.stats import poisson

from poissoncap.bounds_lower import lower_dark, lower_dark_scheduled, lower_prop, lower_prop_scheduled, prop_ratio_limit
from poissoncap.bounds_upper import bosonic_capacity, capacity_per_unit_cost, upper_dark_scheduled, upper_zero_scheduled
from poissoncap.channel import BinaryInput, i0, i1, kl_poisson, mutual_information
from poissoncap.sweep import SweepSpec, run_sweep

E_DECADES = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
# every oracle run made below, as (lambda, E, A); criterion 10 audits them all
SOLVES = (
    [(1.0, 1e-3, 1.0), (1.0, 1e-4, 1.0)]
    + [(1.0, E, math.inf) for E in (1e-3, 1e-4, 1e-5)]
    + [(0.0, E, 10.0) for E in (0.01, 0.1, 1.0)]
    + [(lam, 0.01, 1.0) for lam in (0.0, 0.1, 1.0)]
)


def verdict(n, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def triples(n=50, seed=2024):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(0.05, 2.0, n)
    zeta = rng.uniform(0.05, 5.0, n)
    p = 10 ** rng.uniform(-4, math.log10(0.5), n)
    return list(zip(lam, zeta, p))


def series_kl(a, b):
    y = np.arange(int(a + 12 * math.sqrt(a + 1) + 60))
    pa = poisson.pmf(y, a)
    keep = pa > 0
    return math.fsum(pa[keep] * (poisson.logpmf(y, a)[keep] - poisson.logpmf(y, b)[keep]))


def elog(E):
    return E * math.log(1 / E)


def test_c01_kl_oracle():
    t0 = time.perf_counter()
    g = np.geomspace(0.01, 50.0, 20)
    worst = max(abs(kl_poisson(a, b) - series_kl(a, b)) for a in g for b in g)
    dt = time.perf_counter() - t0
    verdict(1, "KL closed form vs series, 20x20 grid", worst <= 1e-10 and dt < 1.0, f"max |d| = {worst:.2e}, {dt:.2f} s")


def test_c02_decomposition():
    worst = max(abs(i0(*t) + i1(*t) - mutual_information(BinaryInput(t[1], t[2]), t[0])) for t in triples())
    verdict(2, "i0 + i1 = binary MI on 50 triples", worst <= 1e-12, f"max |d| = {worst:.2e}")


def test_c03_dominance():
    bad = 0
    for lam, zeta, p in triples():
        mi = mutual_information(BinaryInput(zeta, p), lam)
        bad += lower_prop(lam, zeta, p) > mi
        bad += lower_dark(lam, zeta, p) > mi
    verdict(3, "lower_prop, lower_dark <= binary MI", bad == 0, f"{bad} violations over 100 comparisons")


def test_c04_proposition1():
    t0 = time.perf_counter()
    lim = prop_ratio_limit(0.1)
    lo = [lower_prop_scheduled(0.0, E, 0.1, peak=1.0) / elog(E) for E in E_DECADES]
    up = [upper_zero_scheduled(E, 1.0).value / elog(E) for E in E_DECADES]
    dt = time.perf_counter() - t0
    window = (0.90 * lim, 1.00 * lim)
    lower_ok = window[0] <= lo[-1] <= window[1]
    upper_ok = abs(up[-1] - (1 + 2 / math.log(1e8))) <= 1e-3
    trend_ok = all(b > a for a, b in zip(lo, lo[1:])) and all(b < a for a, b in zip(up, up[1:]))
    detail = (
        f"lower ratio at 1e-8 = {lo[-1]:.6f} vs window [{window[0]:.3f}, {window[1]:.3f}] "
        f"({'ok' if lower_ok else 'MISSED'}); upper ratio = {up[-1]:.6f} vs {1 + 2 / math.log(1e8):.6f} "
        f"({'ok' if upper_ok else 'MISSED'}); trends {'ok' if trend_ok else 'BROKEN'}; {dt:.2f} s"
    )
    verdict(4, "zero-dark ratios to E log(1/E)", lower_ok and upper_ok and trend_ok and dt < 5.0, detail)


def test_c05_cost_slope():
    t0 = time.perf_counter()
    slope = capacity_per_unit_cost(1.0, 1.0)
    r3 = cached_solve(1.0, 1e-3, 1.0).capacity / 1e-3
    r4 = cached_solve(1.0, 1e-4, 1.0).capacity / 1e-4
    dt = time.perf_counter() - t0
    e3, e4 = abs(r3 / slope - 1), abs(r4 / slope - 1)
    ok = e3 <= 0.10 and e4 <= 0.03 and dt < 60.0
    verdict(5, "C/E -> 2 log 2 - 1 at lambda = 1, A = 1", ok,
            f"C/E = {r3:.6f} ({e3:.1%}) at 1e-3, {r4:.6f} ({e4:.1%}) at 1e-4; {dt:.1f} s")


def test_c06_sandwich():
    t0 = time.perf_counter()
    parts, ok = [], True
    for E, N in ((1e-3, 6), (1e-4, 9), (1e-5, 11)):
        res = cached_solve(1.0, E, math.inf)
        lo = lower_dark_scheduled(1.0, E)
        rep = upper_dark_scheduled(1.0, E, 0.5)
        good = rep.valid and rep.params["N"] == N and N - math.sqrt(N) - 1 > 0
        good &= lo <= res.capacity + res.ba_tol <= rep.value + res.ba_tol
        good &= not res.warnings
        ok &= good
        parts.append(f"{E:g}: {lo:.4e} <= {res.capacity:.4e} <= {rep.value:.4e}")
    dt = time.perf_counter() - t0
    verdict(6, "lower_dark <= C <= upper_dark at lambda = 1", ok and dt < 120.0, "; ".join(parts) + f"; {dt:.1f} s")


def test_c07_dark_bracketing():
    spec = SweepSpec(dark_value=1.0, peak=math.inf, e_grid=(1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8),
                     which=("lower_dark", "upper_dark", "oracle"))
    recs = run_sweep(spec, jobs=min(4, os.cpu_count() or 1))
    bracket_ok, checked = True, 0
    for r in recs:
        q = r.ratio("oracle", "eloglog")
        if q is None:
            continue
        checked += 1
        bracket_ok &= r.ratio("lower_dark", "eloglog") <= q <= r.ratio("upper_dark", "eloglog")
    lo = [r.ratio("lower_dark", "eloglog") for r in recs]
    trend_ok = all(b > a for a, b in zip(lo, lo[1:]))
    verdict(7, "dark-current ratios to E log log(1/E) bracket the oracle", bracket_ok and trend_ok and checked == 4,
            f"{checked} oracle points bracketed={bracket_ok}; lower ratios " + ", ".join(f"{v:.4f}" for v in lo))


def test_c08_bosonic():
    parts, ok = [], True
    for E in (0.01, 0.1, 1.0):
        c, b = cached_solve(0.0, E, 10.0).capacity, bosonic_capacity(E)
        ok &= c <= b
        parts.append(f"{E:g}: {c:.6f} <= {b:.6f}")
    verdict(8, "C(0, E, 10) <= bosonic capacity", ok, "; ".join(parts))


def test_c09_degradation():
    caps = [cached_solve(lam, 0.01, 1.0).capacity for lam in (0.0, 0.1, 1.0)]
    ok = caps[0] >= caps[1] >= caps[2]
    verdict(9, "C nonincreasing in lambda at E = 0.01, A = 1", ok, ", ".join(f"{c:.7f}" for c in caps))


def test_c10_ba_soundness():
    bad = []
    for key in SOLVES:
        res = cached_solve(*key)
        if not (res.monotone and res.gap <= res.ba_tol):
            bad.append(f"{key}: monotone={res.monotone} gap={res.gap:.2e}")
    worst = max(cached_solve(*k).gap / cached_solve(*k).ba_tol for k in SOLVES)
    verdict(10, "BA monotone and gap <= ba_tol on every acceptance solve", not bad,
            f"{len(SOLVES)} solves, worst gap/ba_tol = {worst:.2f}" + ("; " + "; ".join(bad) if bad else ""))


def test_c11_determinism(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"dark_value": 1.0, "peak": 1.0, "e_grid": [1e-2, 1e-3, 1e-4, 1e-5]}))
    outs = []
    for _ in range(2):
        run = subprocess.run([sys.executable, "-m", "poissoncap.cli", "sweep", "--spec", str(spec)],
                             capture_output=True, check=True)
        outs.append(run.stdout)
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    lines = len(outs[0].splitlines())
    verdict(11, "repeated sweep CSV is byte-identical", ok, f"{len(outs[0])} bytes, {lines} lines")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(pytest.main([__file__, "-q", "-s"]))
