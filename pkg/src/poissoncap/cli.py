"""Command-line front end.

Every subcommand prints its result in nats (``--bits`` converts the display
only). Precondition failures exit with status 2 and print one line
``REASON_CODE: message`` on standard error; usage errors exit with 64.
"""
import argparse
import json
import math
import os
import sys
import time

from . import __version__, errors, kernels
from .bounds_lower import dark_schedule, lower_dark, lower_dark_scheduled, lower_prop_scheduled
from .bounds_upper import (
    bosonic_capacity,
    capacity_per_unit_cost,
    upper_dark,
    upper_dark_scheduled,
    upper_zero,
    upper_zero_scheduled,
)
from .channel import BinaryInput, ChannelScenario, kl_poisson, mutual_information
from .errors import BoundValidityError, ConvergenceError, DomainError
from .solver import SolverConfig, solve_capacity
from .sweep import SweepSpec, records_to_csv, records_to_json, run_sweep

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_USAGE = 64
LOG2 = math.log(2.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _peak(text):
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    v = float(text)
    if not v > 0.0:
        raise argparse.ArgumentTypeError("peak must be a positive real or 'inf'")
    return v


def _display(v, bits):
    if bits and math.isfinite(v):
        v = v / LOG2
    if v == 0.0 or not math.isfinite(v):
        return repr(v)
    if 1e-3 <= abs(v) < 1e6:
        return f"{v:.7f}"
    return f"{v:.7e}"


def _emit(args, name, value, params=None):
    if args.format == "json":
        unit = "bits" if args.bits else "nats"
        shown = value / LOG2 if args.bits else value
        out = {"quantity": name, "value": shown, "unit": unit, "params": params or {}}
        print(json.dumps(_clean(out), sort_keys=True))
    else:
        print(_display(value, args.bits))


def _clean(o):
    # strict JSON has no infinities; spell them the way the peak flag does
    if isinstance(o, float) and not math.isfinite(o):
        return "inf" if o > 0 else ("-inf" if o < 0 else "nan")
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


# ----------------------------------------------------------------- commands


def _cmd_kl(args):
    _emit(args, "kl", kl_poisson(args.alpha, args.beta), {"alpha": args.alpha, "beta": args.beta})


def _cmd_mi(args):
    v = mutual_information(BinaryInput(args.zeta, args.p), args.lam)
    _emit(args, "mi", v, {"lambda": args.lam, "zeta": args.zeta, "p": args.p})


def _cmd_lower_prop(args):
    v = lower_prop_scheduled(args.c, args.epsilon, args.zeta, args.peak)
    _emit(args, "lower_prop", v, {"c": args.c, "E": args.epsilon, "zeta": args.zeta})


def _cmd_lower_dark(args):
    if args.zeta is None and args.p is None:
        prm = dark_schedule(args.lam, args.epsilon)
        v = lower_dark_scheduled(args.lam, args.epsilon)
        zeta, p = prm.zeta, prm.p
    else:
        zeta = args.zeta if args.zeta is not None else dark_schedule(args.lam, args.epsilon).zeta
        p = args.p if args.p is not None else args.epsilon / zeta
        v = lower_dark(args.lam, zeta, p)
    _emit(args, "lower_dark", v, {"lambda": args.lam, "E": args.epsilon, "zeta": zeta, "p": p})


def _cmd_upper_zero(args):
    if args.p is not None:
        beta = args.beta if args.beta is not None else 1.0
        _emit(args, "upper_zero", upper_zero(args.epsilon, args.p, beta),
              {"E": args.epsilon, "p": args.p, "beta": beta})
        return
    rep = upper_zero_scheduled(
        args.epsilon, args.beta if args.beta is not None else 1.0, args.optimize_beta
    )
    _emit(args, "upper_zero", rep.value, dict(rep.params, flags=list(rep.flags)))


def _cmd_upper_dark(args):
    p = args.p if args.p is not None else 0.5
    if args.N is not None:
        v = upper_dark(args.lam, args.epsilon, args.N, p)
        params = {"lambda": args.lam, "E": args.epsilon, "N": args.N, "p": p}
    else:
        rep = upper_dark_scheduled(args.lam, args.epsilon, p)
        v, params = rep.value, rep.params
    _emit(args, "upper_dark", v, params)


def _cmd_cost_slope(args):
    _emit(args, "cost_slope", capacity_per_unit_cost(args.lam, args.peak),
          {"lambda": args.lam, "A": args.peak})


def _cmd_bosonic(args):
    _emit(args, "bosonic", bosonic_capacity(args.epsilon), {"E": args.epsilon})


def _solver_config(args):
    kw = {}
    for name in ("grid_size", "x_max", "y_tail_tol", "ba_tol", "max_iters", "bisect_tol"):
        v = getattr(args, name)
        if v is not None:
            kw[name] = v
    return SolverConfig(**kw)


def _cmd_solve(args):
    if args.c is not None:
        sc = ChannelScenario.proportional(args.c, args.epsilon, args.peak)
    else:
        sc = ChannelScenario.constant(args.lam, args.epsilon, args.peak)
    res = solve_capacity(sc, _solver_config(args))
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.format == "json":
        scale = LOG2 if args.bits else 1.0
        out = {
            "capacity": res.capacity / scale,
            "upper": res.upper / scale,
            "gap": res.gap / scale,
            "unit": "bits" if args.bits else "nats",
            "multiplier": res.multiplier,
            "avg_power": res.avg_power,
            "iterations": res.iterations,
            "levels": res.input.levels.tolist(),
            "probs": res.input.probs.tolist(),
            "warnings": list(res.warnings),
        }
        print(json.dumps(_clean(out), sort_keys=True))
        return
    print(_display(res.capacity, args.bits))
    if args.verbose:
        unit = "bits" if args.bits else "nats"
        print(f"gap {_display(res.gap, args.bits)} {unit}, multiplier {res.multiplier:.9g}, "
              f"E[X] {res.avg_power:.9g}, {res.iterations} evaluations", file=sys.stderr)
        for x, w in zip(res.input.levels, res.input.probs):
            if w > 1e-9:
                print(f"  x={x:.6g}  P={w:.6g}", file=sys.stderr)


def _default_jobs():
    env = os.environ.get("POISSON_CAP_JOBS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        raise UsageError(f"POISSON_CAP_JOBS must be an integer, got {env!r}") from None


def _cmd_sweep(args):
    with open(args.spec, encoding="utf-8") as fh:
        try:
            spec = SweepSpec.from_json(fh.read())
        except (TypeError, json.JSONDecodeError) as exc:
            raise DomainError(f"bad sweep spec: {exc}") from None
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    t0 = time.time()
    records = run_sweep(spec, jobs=jobs)
    elapsed = time.time() - t0
    text = records_to_json(records) if args.format == "json" else records_to_csv(records)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.meta:
        meta = {
            "version": __version__,
            "backend": kernels.BACKEND,
            "jobs": jobs,
            "spec_file": os.path.abspath(args.spec),
            "started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(t0)),
            "elapsed_s": round(elapsed, 3),
            "points": len(records),
        }
        with open(args.meta, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


# ------------------------------------------------------------------- parser


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--bits", action="store_true", help="display in bits (nats on disk)")
    common.add_argument("--format", choices=("text", "json"), default="text")

    p = _Parser(prog="poissoncap", description="Low-power Poisson channel capacity bounds.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = cmd("kl", _cmd_kl, "divergence between two Poisson laws")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)

    sp = cmd("mi", _cmd_mi, "mutual information of on-off keying")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--zeta", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)

    sp = cmd("lower-prop", _cmd_lower_prop, "lower bound, dark current c*E")
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--zeta", type=float, required=True)
    sp.add_argument("--peak", type=_peak, default=math.inf)

    sp = cmd("lower-dark", _cmd_lower_dark, "lower bound, constant dark current")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--zeta", type=float)
    sp.add_argument("--p", type=float)

    sp = cmd("upper-zero", _cmd_upper_zero, "upper bound, zero dark current")
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--p", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--optimize-beta", action="store_true")

    sp = cmd("upper-dark", _cmd_upper_dark, "upper bound, constant dark current")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--N", type=int)
    sp.add_argument("--p", type=float)

    sp = cmd("cost-slope", _cmd_cost_slope, "capacity per unit cost under a peak")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--peak", type=_peak, required=True)

    sp = cmd("bosonic", _cmd_bosonic, "pure-loss bosonic capacity")
    sp.add_argument("--epsilon", type=float, required=True)

    sp = cmd("solve", _cmd_solve, "Blahut-Arimoto capacity oracle")
    dark = sp.add_mutually_exclusive_group(required=True)
    dark.add_argument("--lambda", dest="lam", type=float)
    dark.add_argument("--c", type=float)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--peak", type=_peak, required=True)
    sp.add_argument("--grid-size", type=int)
    sp.add_argument("--x-max", type=float)
    sp.add_argument("--y-tail-tol", type=float)
    sp.add_argument("--ba-tol", type=float)
    sp.add_argument("--max-iters", type=int)
    sp.add_argument("--bisect-tol", type=float)
    sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("sweep", help="bounds and oracle over a grid of powers")
    sp.set_defaults(func=_cmd_sweep)
    sp.add_argument("--spec", required=True, help="JSON sweep specification")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--output", "-o", help="output file (default stdout)")
    sp.add_argument("--jobs", type=int, help="worker processes (default $POISSON_CAP_JOBS or 1)")
    sp.add_argument("--meta", help="write run metadata to this JSON sidecar")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (BoundValidityError, DomainError, ConvergenceError) as exc:
        msg = " ".join(str(exc).split())
        print(f"{exc.reason}: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"{errors.IO_ERROR}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
