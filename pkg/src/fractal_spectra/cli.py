"""Command-line front end.

Exit codes: 0 success, 2 invalid model, 3 domain error, 4 resource error.
Artifacts go to ``--out`` (or stdout); a one-line summary goes to stderr.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import divergence_builder as db
from . import lq_spectrum, measure_eval, moran_dim, spectrum
from .errors import DomainError, InvalidModelError, ResourceError
from .ifs_core import IFSModel, require_valid, validate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DOMAIN = 3
EXIT_RESOURCE = 4
FLOAT_FMT = "%.12g"


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FLOAT_FMT % float(x)


def clean(obj):
    """Recursively round floats to 12 significant digits for JSON output."""
    if isinstance(obj, dict):
        return {k: clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return float(FLOAT_FMT % v)
    return obj


def dumps(obj):
    return json.dumps(clean(obj), indent=2, sort_keys=False) + "\n"


def csv_text(header, rows):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def note(msg):
    print(msg, file=sys.stderr)


def _model(args, check=True):
    if not args.model:
        raise DomainError("--model is required")
    model = IFSModel.load(args.model)
    return require_valid(model) if check else model


def cmd_validate(args):
    model = _model(args, check=False)
    violations = validate(model)
    report = {"valid": not violations, "violations": [v.to_dict() for v in violations]}
    write(args.out, dumps(report))
    note("model valid" if not violations else f"{len(violations)} violation(s)")
    return EXIT_OK if not violations else EXIT_INVALID


def cmd_spectrum(args):
    model = _model(args)
    table = spectrum.spectrum_table(model, args.q_min, args.q_max, args.steps)
    rows = [(r.q, r.beta, r.alpha, r.fstar) for r in table.rows]
    if args.format == "json":
        write(args.out, dumps({"fingerprint": table.fingerprint, "rows": [dict(zip(("q", "beta", "alpha", "fstar"), r)) for r in rows]}))
    else:
        write(args.out, csv_text(["q", "beta", "alpha", "fstar"], rows))
    note(f"{len(rows)} rows, s = {spectrum.dimension(model):.12g}")
    return EXIT_OK


def cmd_dims(args):
    model = _model(args)
    report = spectrum.divergence_dimensions(model, args.interval)
    write(args.out, dumps(report.to_dict()))
    note(f"classification {report.classification}")
    return EXIT_OK


def cmd_trace(args):
    model = _model(args)
    tr = measure_eval.local_dim_trace(model, args.x, args.rho, args.n_max, args.tol)
    rows = tr.rows()
    if args.format == "json":
        write(args.out, dumps({"x": tr.x, "rho": tr.rho, "rows": [dict(zip(("n", "r", "mu", "D"), r)) for r in rows]}))
    else:
        write(args.out, csv_text(["n", "r", "mu", "D"], rows))
    off = int(tr.off_support.sum())
    note(f"{len(rows)} rows, {off} off-support")
    return EXIT_OK


def cmd_build(args):
    model = _model(args)
    sched = db.schedule(model, args.interval, args.i_max, args.base_len)
    trace = db.schedule_trace(model, sched)
    report = db.verify_accumulation(trace, args.interval, args.tail_fraction, args.tol)
    n_digits = min(sched.total, args.n_digits)
    verify = report.to_dict()
    verify.update(total_length=sched.total, digits_written=n_digits, max_error_bound=float(trace.error_bound.max()))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write(os.path.join(args.out, "schedule.json"), dumps(sched.to_dict()))
        digits = db.emit_digits(model, sched, n_digits)
        write(os.path.join(args.out, "digits.txt"), db.digits_to_text(digits) + "\n")
        rows = zip(trace.n.tolist(), trace.ln_p.tolist(), trace.ln_r.tolist(), trace.T.tolist())
        write(os.path.join(args.out, "trace.csv"), csv_text(["n", "ln_p", "ln_r", "T"], rows))
        write(os.path.join(args.out, "verify.json"), dumps(verify))
    else:
        write(None, dumps(verify))
    note(f"{len(sched.blocks)} blocks, total {sched.total}, hausdorff {report.hull_distance:.4g}, {'pass' if report.passed else 'FAIL'}")
    return EXIT_OK


def cmd_moran(args):
    if args.spec:
        spec = moran_dim.MoranSpec.load(args.spec)
    else:
        model = _model(args)
        sched = db.schedule(model, args.interval, args.i_max, args.base_len)
        spec = moran_dim.from_schedule(model, sched)
    k_max = args.k_max or spec.n_levels
    window = args.window or max(1, k_max // 2)
    res = moran_dim.packing_dim(spec, k_max, window)
    seq = res.s_sequence
    if args.format == "json":
        write(
            args.out,
            dumps(
                {
                    "dim": res.dim,
                    "condition_ok": res.condition_ok,
                    "argmax_k": res.argmax_k,
                    "metadata": spec.metadata,
                    "rows": [dict(zip(("k", "s_k", "c_k", "M_k", "ratio_log"), r)) for r in seq.rows()],
                }
            ),
        )
    else:
        write(args.out, csv_text(["k", "s_k", "c_k", "M_k", "ratio_log"], seq.rows()))
    note(f"packing dim {res.dim:.12g}, condition (2.6) trend {'ok' if res.condition_ok else 'not met'}")
    return EXIT_OK


def cmd_lq(args):
    model = _model(args)
    qs = np.linspace(args.q_min, args.q_max, args.steps)
    cmp = lq_spectrum.compare_beta(model, qs, args.n_min, args.n_max, args.rho)
    rows = [(e.q, e.tau_hat, e.beta_theory, e.residual) for e in cmp.estimates]
    if args.format == "json":
        write(args.out, dumps({"max_deviation": cmp.max_deviation, "rows": [dict(zip(("q", "tau_hat", "beta", "residual"), r)) for r in rows]}))
    else:
        write(args.out, csv_text(["q", "tau_hat", "beta", "residual"], rows))
    note(f"max |tau_hat - beta| = {cmp.max_deviation:.4g}")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="IFS model JSON")
    common.add_argument("--out", help="output path (directory for build); default stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seedless", action="store_true", default=True, help=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="fractal-spectra", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check probabilities and the open set condition")

    s = sub.add_parser("spectrum", parents=[common], help="tabulate beta, alpha, beta*")
    s.add_argument("--q-min", type=float, default=-5.0)
    s.add_argument("--q-max", type=float, default=5.0)
    s.add_argument("--steps", type=int, default=101)

    s = sub.add_parser("dims", parents=[common], help="dimensions of divergence-point sets")
    s.add_argument("--interval", type=float, nargs="+", required=True, metavar="A [B]")

    s = sub.add_parser("trace", parents=[common], help="local dimension trace at a point")
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--rho", type=float, default=1 / 3)
    s.add_argument("--n-max", type=int, default=20)
    s.add_argument("--tol", type=float, default=1e-6)

    s = sub.add_parser("build", parents=[common], help="construct a point with prescribed accumulation set")
    s.add_argument("--interval", type=float, nargs="+", required=True, metavar="A [B]")
    s.add_argument("--i-max", type=int, default=6)
    s.add_argument("--base-len", type=int, default=50)
    s.add_argument("--tail-fraction", type=float, default=0.5)
    s.add_argument("--tol", type=float, default=0.05)
    s.add_argument("--n-digits", type=int, default=10**6, help="digits written to digits.txt (prefix)")

    s = sub.add_parser("moran", parents=[common], help="packing dimension of a Moran structure")
    s.add_argument("--spec", help="MoranSpec JSON (otherwise derived from --model and --interval)")
    s.add_argument("--interval", type=float, nargs="+", metavar="A [B]")
    s.add_argument("--i-max", type=int, default=6)
    s.add_argument("--base-len", type=int, default=50)
    s.add_argument("--k-max", type=int, default=0)
    s.add_argument("--window", type=int, default=0)

    s = sub.add_parser("lq", parents=[common], help="empirical L^q spectrum against beta")
    s.add_argument("--q-min", type=float, default=0.0)
    s.add_argument("--q-max", type=float, default=3.0)
    s.add_argument("--steps", type=int, default=7)
    s.add_argument("--rho", type=float, default=1 / 3)
    s.add_argument("--n-min", type=int, default=3)
    s.add_argument("--n-max", type=int, default=10)
    return p


COMMANDS = {
    "validate": cmd_validate,
    "spectrum": cmd_spectrum,
    "dims": cmd_dims,
    "trace": cmd_trace,
    "build": cmd_build,
    "moran": cmd_moran,
    "lq": cmd_lq,
}


def run(argv=None):
    args = build_parser().parse_args(argv)
    for name in ("tol", "tail_fraction", "rho"):
        v = getattr(args, name, None)
        if v is not None and not v > 0:
            note(f"--{name.replace('_', '-')} must be positive")
            return EXIT_DOMAIN
    try:
        if getattr(args, "interval", None) is not None:
            args.interval = spectrum.as_interval(args.interval)
        elif args.command == "moran" and not args.spec:
            raise DomainError("moran needs --spec or --model with --interval")
        return COMMANDS[args.command](args)
    except InvalidModelError as exc:
        note(f"invalid model: {exc}")
        return EXIT_INVALID
    except ResourceError as exc:
        note(f"resource limit: {exc}")
        return EXIT_RESOURCE
    except (DomainError, ValueError) as exc:
        note(f"domain error: {exc}")
        return EXIT_DOMAIN
    except OSError as exc:
        note(f"i/o error: {exc}")
        return EXIT_DOMAIN


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
