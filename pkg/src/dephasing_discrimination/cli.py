"""Command-line interface: single quantities, figure sweeps and property suites.

Every output carries a metadata block with all parameters and the seed.
CSV data rows are byte-stable for a fixed configuration.

Exit codes: 0 success, 2 usage or invalid parameters, 3 numerical convergence
failure, 4 verification failure.
"""

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .bounds import (exact_unconstrained, frobenius_bound, multishot_bound, multishot_exact,
                     perr_upper, projector_bound, qubit_bound, section_bound, szego_section_value,
                     chernoff_rank2)
from .discrimination import DiscriminationProblem, delta_trace_norms, product_probe_delta_norms
from .errors import ConvergenceError
from .multilevel import build_multilevel, dephasing_difference_coeffs, szego_functional
from .numerics import child_rng
from .states import EnergyBudget, QubitProbe, sample_constrained_vectors
from .verify import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_VERIFY = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_grid(text):
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"empty grid {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    # round away the drift of repeated float addition so row keys are clean
    return [round(start + i * step, 12) for i in range(count)]


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("values must be integers >= 1")
    return vals


def _common(p):
    p.add_argument("--gamma1", type=float, default=0.1)
    p.add_argument("--gamma2", type=float, default=1.0)
    p.add_argument("--q1", type=float, default=0.5)
    p.add_argument("--energy", type=float, default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("auto", "tensor_quadrature", "mc_mixture"),
                   default="auto")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def build_parser():
    parser = _Parser(prog="dephasing-discrimination",
                     description="Discrimination of bosonic dephasing channels.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("exact", "qubit-bound", "projector-bound", "frobenius-bound",
                 "multishot-exact", "multishot-bound", "perr-upper"):
        _common(sub.add_parser(name))
    p = sub.add_parser("chernoff")
    _common(p)
    p.add_argument("--level", type=int, default=2, help="excited Fock level m of the probe")
    p.add_argument("--population", type=float, default=0.5, help="excited population r_m")
    p = sub.add_parser("szego-sweep")
    _common(p)
    p.add_argument("--sizes", type=_int_list, default=None,
                   help="section sizes M (default 64,256,1024; 10,20,40 for --shots 2)")
    p = sub.add_parser("figure")
    _common(p)
    p.add_argument("id", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--panel", choices=("main", "inset"), default="main")
    p.add_argument("--grid", type=_float_grid, default=None, help="sweep grid start:stop:step")
    p.add_argument("--shot-list", type=_int_list, default=None)
    p = sub.add_parser("verify")
    _common(p)
    p.add_argument("suite", choices=SUITES)
    return parser


# --- configuration -------------------------------------------------------------------

def _problem(args):
    return DiscriminationProblem(args.gamma1, args.gamma2, args.q1)


def _check_config(args):
    if not 0 <= args.q1 <= 1:
        raise UsageError(f"--q1 must lie in [0, 1], got {args.q1}")
    if args.dim < 2:
        raise UsageError(f"--dim must be >= 2, got {args.dim}")
    if args.samples is not None and args.samples < 1:
        raise UsageError(f"--samples must be >= 1, got {args.samples}")
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must lie in [0, 2^64)")
    if args.shots is not None and args.shots < 1:
        raise UsageError(f"--shots must be >= 1, got {args.shots}")


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} requires " + ", ".join("--" + n for n in missing))


def _method(args, n):
    if args.method != "auto":
        return args.method
    return "tensor_quadrature" if n <= 3 else "mc_mixture"


def _samples(args, default):
    return args.samples if args.samples is not None else default


# --- commands ------------------------------------------------------------------------

def cmd_bound(args):
    """Single-row result for one quantity."""
    p = _problem(args)
    c = args.command
    if c == "exact":
        return [exact_unconstrained(p).as_row()], {}
    if c in ("qubit-bound", "projector-bound", "frobenius-bound"):
        _need(args, "energy")
        fn = {"qubit-bound": qubit_bound, "projector-bound": projector_bound,
              "frobenius-bound": frobenius_bound}[c]
        return [fn(p, EnergyBudget(args.energy)).as_row()], {}
    if c == "multishot-exact":
        _need(args, "shots")
        method = _method(args, args.shots)
        samples = _samples(args, 10**6)
        rep = multishot_exact(p, args.shots, method, samples, args.seed)
        return [rep.as_row()], {"method": method, "samples": samples}
    if c in ("multishot-bound", "perr-upper"):
        _need(args, "energy", "shots")
        fn = multishot_bound if c == "multishot-bound" else perr_upper
        return [fn(p, EnergyBudget(args.energy), args.shots).as_row()], {}
    if c == "chernoff":
        _need(args, "shots")
        probe = QubitProbe(args.level, args.population)
        return [chernoff_rank2(p, probe, args.shots).as_row()], {}
    raise UsageError(f"unknown command {c!r}")


def cmd_szego_sweep(args):
    p = _problem(args)
    n = args.shots or 1
    if n > 2:
        raise UsageError("szego-sweep supports --shots 1 or 2")
    sizes = args.sizes or ([64, 256, 1024] if n == 1 else [10, 20, 40])
    limit = multishot_exact(p, n, "tensor_quadrature").value
    rows = []
    for M in sorted(sizes):
        if n == 1:
            value = szego_section_value(p, M)
        else:
            value = szego_functional(build_multilevel(dephasing_difference_coeffs(p, n, M)), np.abs)
        rows.append({"M": M, "section_value": value, "limit": limit,
                     "rel_error": abs(value - limit) / limit if limit else abs(value)})
    return rows, {"levels": n}


def _figure1(args):
    p = _problem(args)
    grid = args.grid or _float_grid("0:12:0.25")
    exact = exact_unconstrained(p).value
    rows = []
    for E in grid:
        if E == 0:
            # only the vacuum fits; its outputs differ by the priors alone
            qub = proj = frob = abs(p.q1 - p.q2)
        elif E < 0.5:
            qub = qubit_bound(p, E).value
            proj, frob = section_bound(p, 0)
        else:
            qub = qubit_bound(p, E).value
            proj = projector_bound(p, E).value
            frob = frobenius_bound(p, E).value
        rows.append({"E": E, "exact": exact, "qubit_bound": qub, "projector_bound": proj,
                     "frobenius_bound": frob})
    return rows, {"low_energy_sections": "levels 0 for 0 < E < 1/2"}


def _figure2(args):
    grid = args.grid or _float_grid("0.05:2:0.05")
    E = 2.0 if args.energy is None else args.energy
    samples = _samples(args, 10**4)
    vecs = sample_constrained_vectors(args.dim, EnergyBudget(E), samples, "mixed", args.seed)
    rows = []
    for g2 in grid:
        p = DiscriminationProblem(args.gamma1, g2, args.q1)
        sampled = float(delta_trace_norms(p, vecs).max())
        proj = projector_bound(p, E).value if E >= 0.5 else qubit_bound(p, E).value
        rows.append({"gamma2": g2, "sampled_max": sampled, "projector_bound": proj})
    return rows, {"energy": E, "samples": samples, "strategy": "mixed", "dim": args.dim}


def _multishot_exact(p, n, args):
    method = _method(args, n)
    rep = multishot_exact(p, n, method, _samples(args, 10**6), args.seed)
    return rep.value, method


def _figure3(args):
    p = _problem(args)
    if args.panel == "inset":
        E = 12.0 if args.energy is None else args.energy
        rows, methods = [], {}
        for n in sorted(args.shot_list or list(range(1, 11))):
            exact_n, methods[n] = _multishot_exact(p, n, args)
            bound_n = multishot_bound(p, E, n).value
            rows.append({"n": n, "exact": exact_n, "bound": bound_n, "gap": exact_n - bound_n})
        return rows, {"energy": E, "panel": "inset", "samples": _samples(args, 10**6),
                      "methods": methods}
    grid = args.grid or _float_grid("0.25:12:0.25")
    shots = sorted(args.shot_list or [3, 5])
    exact = {}
    methods = {}
    for n in shots:
        exact[n], methods[n] = _multishot_exact(p, n, args)
    rows = []
    for E in grid:
        row = {"E": E}
        for n in shots:
            row[f"exact_n{n}"] = exact[n]
            row[f"bound_n{n}"] = multishot_bound(p, E, n).value
        rows.append(row)
    return rows, {"panel": "main", "samples": _samples(args, 10**6), "methods": methods}


def _figure4(args):
    grid = args.grid or _float_grid("0.05:2:0.05")
    E = 2.0 if args.energy is None else args.energy
    shots = sorted(args.shot_list or [3, 5])
    samples = _samples(args, 10**4)
    levels = np.empty(samples)
    pops = np.empty(samples)
    for i in range(samples):
        rng = child_rng(args.seed, i)
        levels[i] = rng.integers(1, args.dim)
        pops[i] = min(1.0, E / levels[i]) * rng.random()
    rows = []
    for g2 in grid:
        p = DiscriminationProblem(args.gamma1, g2, args.q1)
        row = {"gamma2": g2}
        for n in shots:
            row[f"sampled_max_n{n}"] = float(product_probe_delta_norms(p, levels, pops, n).max())
            row[f"bound_n{n}"] = multishot_bound(p, E, n).value
        rows.append(row)
    return rows, {"energy": E, "samples": samples, "dim": args.dim,
                  "probes": "qubit-family products on the 2^n support subspace"}


def cmd_figure(args):
    return {1: _figure1, 2: _figure2, 3: _figure3, 4: _figure4}[args.id](args)


def cmd_verify(args):
    if args.suite == "bounds":
        kwargs = {"gamma1": args.gamma1, "gamma2": args.gamma2, "q1": args.q1}
    else:
        kwargs = {"seed": args.seed}
    checks = run_suite(args.suite, **kwargs)
    return [c.as_row() for c in checks], {"suite": args.suite}


# --- output --------------------------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % v
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _columns(rows):
    cols = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    return cols


def render(rows, metadata, fmt):
    if fmt == "json":
        return json.dumps({"metadata": _jsonable(metadata), "rows": _jsonable(rows)},
                          indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    for k, v in metadata.items():
        buf.write(f"# {k}: {json.dumps(_jsonable(v), sort_keys=True)}\n")
    cols = _columns(rows)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def _check_rows(rows):
    for r in rows:
        for k, v in r.items():
            if isinstance(v, (float, np.floating)) and not math.isfinite(v):
                raise ConvergenceError(f"non-finite value in column {k!r}")


def _metadata(args, extra, wall):
    meta = {"tool": "dephasing-discrimination", "version": __version__,
            "command": args.command}
    for k in ("id", "panel", "suite", "gamma1", "gamma2", "q1", "energy", "shots", "dim",
              "samples", "seed", "method", "level", "population", "sizes", "grid", "shot_list"):
        if hasattr(args, k):
            meta[k] = getattr(args, k)
    meta.update(extra)
    meta["wall_time_s"] = round(wall, 3)
    return meta


def _fail(code, kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_config(args)
        t0 = time.perf_counter()
        if args.command == "figure":
            rows, extra = cmd_figure(args)
        elif args.command == "szego-sweep":
            rows, extra = cmd_szego_sweep(args)
        elif args.command == "verify":
            rows, extra = cmd_verify(args)
        else:
            rows, extra = cmd_bound(args)
        if args.command != "verify":
            _check_rows(rows)
        text = render(rows, _metadata(args, extra, time.perf_counter() - t0), args.format)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    except ConvergenceError as exc:
        return _fail(EXIT_CONVERGENCE, "convergence", str(exc))
    except ValueError as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, str(exc))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if args.command == "verify" and not all(r["passed"] for r in rows):
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
