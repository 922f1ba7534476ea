"""Sweeps over average-power decades: every bound and the oracle per point,
normalised by ``E log(1/E)``, ``E log log(1/E)`` and ``E``.

Records serialise to CSV and JSON with one fixed schema (:data:`COLUMNS`).
Floats are written with 17 significant digits so they round-trip exactly.
"""
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

from . import errors
from .bounds_lower import dark_schedule, lower_dark_scheduled, lower_prop, lower_prop_scheduled
from .bounds_upper import upper_dark_scheduled, upper_zero_scheduled
from .channel import ChannelScenario
from .errors import BoundValidityError, ConvergenceError, DomainError
from .solver import SolverConfig, solve_capacity

__all__ = [
    "COLUMNS",
    "SELECTORS",
    "DEFAULT_E_GRID",
    "SweepSpec",
    "SweepRecord",
    "normalizers",
    "run_sweep",
    "records_to_csv",
    "records_to_json",
]

SELECTORS = ("lower_prop", "lower_dark", "upper_zero", "upper_dark", "oracle")
NORMALIZERS = ("elog", "eloglog", "linear")
COLUMNS = (
    "epsilon",
    "lambda",
    "lower_prop",
    "lower_dark",
    "upper_zero",
    "upper_dark",
    "oracle",
    "ratio_elog",
    "ratio_eloglog",
    "ratio_linear",
    "flags",
)
DEFAULT_E_GRID = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
# the oracle is skipped below this power unless the spec lowers it
DEFAULT_ORACLE_MIN_E = 1e-6


def normalizers(E: float):
    """``(E log(1/E), E log log(1/E), E)``; an entry is ``None`` where its
    normaliser is not positive (``E >= 1`` for the first, ``E >= 1/e`` for
    the second)."""
    if not E > 0.0:
        raise DomainError(f"E must be > 0, got {E!r}")
    e_log = E * math.log(1.0 / E) if E < 1.0 else None
    e_loglog = None
    if E < 1.0:
        ll = math.log(math.log(1.0 / E))
        e_loglog = E * ll if ll > 0.0 else None
    return e_log, e_loglog, E


def _parse_peak(v):
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity"):
            return math.inf
        v = float(v)
    return float(v)


@dataclass(frozen=True)
class SweepSpec:
    """What to evaluate along a descending grid of average powers.

    ``dark_kind`` is ``"constant"`` (``dark_value`` is lambda) or
    ``"proportional"`` (lambda = ``dark_value`` * E at each point). ``zeta``
    is the on-level of the proportional lower bound, ``p_dark`` the head
    weight of the dark upper bound, ``beta`` (or a search over it with
    ``optimize_beta``) the tail scale of the zero-dark upper bound. The oracle
    runs only at ``E >= oracle_min_e``.
    """

    dark_kind: str = "constant"
    dark_value: float = 0.0
    peak: float = math.inf
    e_grid: tuple = DEFAULT_E_GRID
    which: tuple = SELECTORS
    zeta: float = 0.1
    p_dark: float = 0.5
    beta: float = 1.0
    optimize_beta: bool = False
    oracle_min_e: float = DEFAULT_ORACLE_MIN_E
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        object.__setattr__(self, "e_grid", tuple(float(e) for e in self.e_grid))
        if isinstance(self.which, str):
            object.__setattr__(self, "which", (self.which,))
        unknown = set(self.which) - set(SELECTORS)
        if unknown:
            raise DomainError(f"unknown selectors {sorted(unknown)}")
        object.__setattr__(self, "which", tuple(s for s in SELECTORS if s in set(self.which)))
        object.__setattr__(self, "peak", _parse_peak(self.peak))
        if not self.which:
            raise DomainError("nothing selected")
        if self.dark_kind not in ("constant", "proportional"):
            raise DomainError(f"unknown dark-current kind {self.dark_kind!r}")
        if not self.dark_value >= 0.0 or math.isinf(self.dark_value):
            raise DomainError("dark-current parameter must be finite and >= 0")
        if not self.peak > 0.0:
            raise DomainError("peak must be > 0")
        if not self.e_grid:
            raise DomainError("empty E grid")
        if any(not e > 0.0 or math.isinf(e) for e in self.e_grid):
            raise DomainError("E grid must be positive and finite")
        if any(a <= b for a, b in zip(self.e_grid, self.e_grid[1:])):
            raise DomainError("E grid must be strictly descending")
        if not self.zeta > 0.0 or not 0.0 < self.p_dark < 1.0 or not self.beta > 0.0:
            raise DomainError("schedule overrides out of range")

    def scenario(self, E: float) -> ChannelScenario:
        return ChannelScenario(self.dark_kind, float(self.dark_value), float(E), self.peak)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        """Build from the JSON form: the field names above, ``peak`` may be
        ``"inf"``, and ``solver`` a mapping of :class:`SolverConfig` fields."""
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown spec keys {sorted(unknown)}")
        if "solver" in d:
            d["solver"] = SolverConfig(**d["solver"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SweepRecord:
    """One grid point.

    ``values`` maps each selected quantity to nats or ``None`` (not
    selected, or invalid here). ``ratios`` maps ``(quantity, normaliser)``
    to ``value / normaliser`` for every available pair. ``flags`` holds
    ``quantity:REASON`` entries for every failed precondition.
    """

    E: float
    lambda_effective: float
    values: dict
    ratios: dict
    flags: tuple

    def ratio(self, quantity: str, normaliser: str):
        return self.ratios.get((quantity, normaliser))

    def row(self) -> dict:
        """The CSV/JSON row. ``ratio_*`` columns are ratios of the oracle."""
        out = {"epsilon": self.E, "lambda": self.lambda_effective}
        for q in SELECTORS:
            out[q] = self.values.get(q)
        for n in NORMALIZERS:
            out[f"ratio_{n}"] = self.ratios.get(("oracle", n))
        out["flags"] = ";".join(self.flags)
        return out


def _evaluate(spec, E, which):
    sc = spec.scenario(E)
    lam = sc.dark_current
    values, flags = {}, []

    def attempt(name, fn):
        try:
            values[name] = float(fn())
        except (BoundValidityError, DomainError, ConvergenceError) as exc:
            values[name] = None
            flags.append(f"{name}:{getattr(exc, 'reason', errors.DomainError.reason)}")

    if "lower_prop" in which:
        attempt("lower_prop", lambda: _lower_prop(spec, lam, E))
    if "lower_dark" in which:
        attempt("lower_dark", lambda: _lower_dark(lam, E, spec.peak))
    if "upper_zero" in which:
        attempt("upper_zero", lambda: _upper_zero(spec, E))
    if "upper_dark" in which:
        attempt("upper_dark", lambda: upper_dark_scheduled(lam, E, spec.p_dark).value)
    if "oracle" in which:
        if E >= spec.oracle_min_e:
            attempt("oracle", lambda: solve_capacity(sc, spec.solver).capacity)
        else:
            values["oracle"] = None

    ratios = {}
    for q, v in values.items():
        if v is None:
            continue
        for n, norm in zip(NORMALIZERS, normalizers(E)):
            if norm is not None:
                ratios[(q, n)] = v / norm
    return SweepRecord(E, lam, values, ratios, tuple(flags))


def _lower_prop(spec, lam, E):
    if spec.dark_kind == "proportional":
        return lower_prop_scheduled(spec.dark_value, E, spec.zeta, spec.peak)
    # same schedule p = E / zeta at a fixed dark current
    lower_prop_scheduled(0.0, E, spec.zeta, spec.peak)  # precondition checks only
    return lower_prop(lam, spec.zeta, E / spec.zeta)


def _lower_dark(lam, E, peak):
    if lam > 0.0 and dark_schedule(lam, E).zeta > peak:
        raise BoundValidityError(errors.LOWER_P_INFEASIBLE, "scheduled on-level exceeds the peak")
    return lower_dark_scheduled(lam, E)


def _upper_zero(spec, E):
    # the zero-dark bound stays an upper bound for lam > 0 (dark current only
    # adds noise) and for finite peaks (a constraint only lowers capacity)
    return upper_zero_scheduled(E, spec.beta, spec.optimize_beta).value


def _point(args):
    spec, E = args
    return _evaluate(spec, E, spec.which)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list:
    """One :class:`SweepRecord` per ``E`` in ``spec.e_grid``, in grid order.

    ``jobs > 1`` evaluates points in worker processes; the records are the
    same either way. Raises :class:`DomainError` when no point yields any
    value.
    """
    tasks = [(spec, E) for E in spec.e_grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_point, tasks))
    else:
        records = [_point(t) for t in tasks]
    if all(v is None for r in records for v in r.values.values()):
        raise DomainError("every sweep point is invalid: " + "; ".join(records[0].flags))
    return records


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return format(v, ".17g")


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        row = r.row()
        w.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()


def records_to_json(records) -> str:
    """JSON array of rows keyed by :data:`COLUMNS`; missing values are
    ``null``."""
    return json.dumps([r.row() for r in records], indent=2) + "\n"
