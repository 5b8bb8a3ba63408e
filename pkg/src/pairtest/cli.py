"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O error.
Tables are CSV by default (header row first, 17 significant digits for
floats); ``--format json`` emits one object ``{"meta": ..., "rows": [...]}``.
Commands that produce several tables separate them by a blank line in CSV
and tag each JSON row with a ``table`` field.
"""

import argparse
import io
import json
import math
import sys

import numpy as np
from scipy import stats

from . import analytic, asymptotics, exactdist, simulator, verification
from ._validation import CapacityError
from .model import classify_regime, new_model

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3
LOG_DOMAIN_THRESHOLD = 300


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else _fmt(v)
    return value


def render(tables, fmt, meta):
    """Render ``[(name, columns, rows)]`` as CSV or JSON text."""
    if fmt == "json":
        multi = len(tables) > 1
        rows = []
        for name, columns, body in tables:
            for r in body:
                rec = {"table": name} if multi else {}
                rec.update({c: _json_value(v) for c, v in zip(columns, r)})
                rows.append(rec)
        meta = {k: _json_value(v) if not isinstance(v, list) else [_json_value(x) for x in v] for k, v in meta.items()}
        return json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n"
    out = io.StringIO()
    for i, (_, columns, body) in enumerate(tables):
        if i:
            out.write("\n")
        out.write(",".join(columns) + "\n")
        for r in body:
            out.write(",".join(_fmt(v) for v in r) + "\n")
    return out.getvalue()


def _model(args):
    try:
        return new_model(args.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args):
    m = _model(args)
    if args.reps < 2:
        raise UsageError("--reps must be at least 2")
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    s = simulator.monte_carlo(m, args.n, args.reps, args.seed, n_jobs=args.n_jobs)
    rows = [(i, int(t)) for i, t in enumerate(s.counts)]
    return [("draws", ["rep", "T"], rows), ("summary", ["mean", "var"], [(s.mean, s.variance)])]


def cmd_pmf(args):
    m = _model(args)
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    use_log = args.n > LOG_DOMAIN_THRESHOLD if args.log == "auto" else args.log == "on"
    try:
        table = exactdist.exact_pmf_log(m, args.n) if use_log else exactdist.exact_pmf(m, args.n)
    except CapacityError as exc:
        raise UsageError(f"{exc} (pass --log on)") from None
    rows = [(int(k), float(pk), float(lp)) for k, pk, lp in zip(table.support, table.pmf(), table.log_pmf())]
    return [("pmf", ["k", "P", "logP"], rows)]


def cmd_moments(args):
    m = _model(args)
    rows = []
    for n in args.n:
        if n < 2:
            raise UsageError("--n must be at least 2")
        s = analytic.closed_form_moments(m, n)
        rows.append((n, float(s.mean), float(s.variance), s.source))
    return [("moments", ["n", "mean", "var", "source"], rows)]


def cmd_mgf(args):
    m = _model(args)
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    rows = []
    for lam in args.lam:
        log_m = analytic.log_mgf(m, args.n, lam)
        try:
            value = analytic.mgf(m, args.n, lam)
        except CapacityError:
            value = math.inf
        rows.append((lam, value, log_m))
    return [("mgf", ["lambda", "M", "logM"], rows)]


def cmd_rate(args):
    m = _model(args)
    rows = []
    for x in args.x:
        r = asymptotics.rate(m, x)
        rows.append((x, r.rate, r.lambda_star, r.converged, r.boundary))
    return [("rate", ["x", "I", "lambda_star", "converged", "boundary"], rows)]


def cmd_regime(args):
    m = _model(args)
    r = classify_regime(m)
    return [("regime", ["p", "regime", "lower", "upper"], [(float(m.p), r.kind.name, r.lower, r.upper)])]


def cmd_verify(args):
    for p in args.p:
        try:
            new_model(p)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        results = verification.run_verification(args.n_max, tuple(args.p))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [(r.name, r.n, r.p, float(r.max_error), float(r.tolerance), r.passed) for r in results]
    args._failed = sum(not r.passed for r in results)
    return [("verify", ["name", "n", "p", "max_error", "tolerance", "pass"], rows)]


def cmd_report(args):
    m = _model(args)
    c = asymptotics.constants(m)
    tables = []
    if args.table in ("all", "lln"):
        rows = []
        for n in args.n_grid:
            per_item = float(analytic.closed_form_mean(m, n)) / n
            rows.append((n, per_item, c.mu, per_item - c.mu))
        tables.append(("lln", ["n", "mean_per_item", "mu", "deviation"], rows))
    if args.table in ("all", "clt"):
        rows = []
        for n in args.clt_n:
            s = simulator.monte_carlo(m, n, args.reps, args.seed, n_jobs=args.n_jobs)
            z = asymptotics.clt_standardize(s, c, n)
            ks = stats.kstest(z, "norm").statistic
            rows.append((n, args.reps, float(ks), float(np.var(z, ddof=1))))
        tables.append(("clt", ["n", "reps", "ks", "var_standardized"], rows))
    if args.table in ("all", "ldp"):
        logs = {n: exactdist.exact_pmf_log(m, n) for n in args.ldp_n}
        rows = []
        for x in args.x:
            r = asymptotics.rate(m, x)
            rows.append((x, r.rate, *(asymptotics.tail_exponent(m, n, x, logs[n]) for n in args.ldp_n)))
        tables.append(("ldp", ["x", "I", *(f"a_{n}" for n in args.ldp_n)], rows))
    return tables


def build_parser():
    parser = _Parser(prog="pairtest", description="Pairwise group-testing analysis toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default="-", help="output path (default: standard output)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = add("simulate", cmd_simulate, "Monte Carlo draws of T_n")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--reps", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n-jobs", type=int, default=1)

    sp = add("pmf", cmd_pmf, "exact distribution of T_n")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--log", choices=("auto", "on", "off"), default="auto")

    sp = add("moments", cmd_moments, "closed-form mean and variance")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=_int_list, required=True)

    sp = add("mgf", cmd_mgf, "moment generating function")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=_float_list, default=[0.0])

    sp = add("rate", cmd_rate, "large-deviation rate function")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--x", type=_float_list, required=True)

    sp = add("regime", cmd_regime, "optimality regime of p")
    sp.add_argument("--p", type=float, required=True)

    sp = add("verify", cmd_verify, "run the cross-validation matrix")
    sp.add_argument("--n-max", type=int, default=12)
    sp.add_argument("--p", type=_float_list, default=[0.3, 0.35])

    sp = add("report", cmd_report, "LLN / CLT / LDP convergence tables")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--table", choices=("all", "lln", "clt", "ldp"), default="all")
    sp.add_argument("--n-grid", type=_int_list, default=[10, 20, 50, 100, 200, 500, 1000, 2000])
    sp.add_argument("--clt-n", type=_int_list, default=[100, 1000, 10000])
    sp.add_argument("--reps", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n-jobs", type=int, default=1)
    sp.add_argument("--x", type=_float_list, default=[0.95, 1.1, 1.5])
    sp.add_argument("--ldp-n", type=_int_list, default=[500, 1000, 2000])
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args._failed = 0
    try:
        tables = args.func(args)
    except UsageError as exc:
        print(f"pairtest {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    meta = {k: v for k, v in vars(args).items() if not k.startswith("_") and k not in ("func", "out")}
    text = render(tables, args.format, meta)
    try:
        if args.out == "-":
            sys.stdout.write(text)
        else:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"pairtest: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_VERIFY if args._failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
