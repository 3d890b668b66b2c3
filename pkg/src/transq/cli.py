"""Command-line front end.

Exit codes: 0 ok, 1 comparison/internal check failed, 2 invalid model,
3 malformed input, 4 excessive truncation, 5 no stationary convergence.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import exact, modelfile, oracle, sim
from .modelfile import MalformedModelFile

EXIT_OK = 0
EXIT_COMPARE = 1
EXIT_INVALID = 2
EXIT_MALFORMED = 3
EXIT_TRUNCATION = 4
EXIT_NO_CONVERGENCE = 5

TRUNCATION_LIMIT = 1e-6
ORACLE_TOL = 1e-9
SE_MULTIPLIER = 4.0


class CliExit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def fmt_num(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}"{k}": {dumps(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return fmt_num(obj)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args):
    try:
        model, law, report = modelfile.load(args.model)
    except MalformedModelFile as exc:
        raise CliExit(EXIT_MALFORMED, str(exc))
    if not report:
        raise CliExit(EXIT_INVALID, f"invalid model:\n{report}")
    if getattr(args, "dump_model", None):
        modelfile.dump(model, law, args.dump_model)
    return model, law


def _default_seed() -> int:
    return int(os.environ.get("TRANSQ_SEED", "0"))


def cmd_validate(args) -> int:
    try:
        model, law, report = modelfile.load(args.model)
    except MalformedModelFile as exc:
        raise CliExit(EXIT_MALFORMED, str(exc))
    print(report)
    if not report:
        return EXIT_INVALID
    if args.dump_model:
        modelfile.dump(model, law, args.dump_model)
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.time < 0:
        raise CliExit(EXIT_MALFORMED, "--time must be nonnegative")
    model, law = _load(args)
    res = exact.solve(model, law, args.time, moments=args.moments, max_degree=args.max_degree)
    if res.truncation_loss > TRUNCATION_LIMIT and not args.allow_truncation:
        raise CliExit(
            EXIT_TRUNCATION,
            f"truncation loss {res.truncation_loss:.3g} exceeds {TRUNCATION_LIMIT:g}; raise --max-degree or pass --allow-truncation",
        )
    if args.format == "csv":
        rows = ["m,probability"] + [f"{m},{fmt_num(p)}" for m, p in enumerate(res.distribution)]
        _emit("\n".join(rows) + "\n", args.out)
    else:
        _emit(dumps(res.to_dict()) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.runs < 1:
        raise CliExit(EXIT_MALFORMED, "--runs must be at least 1")
    model, law = _load(args)
    seed = _default_seed() if args.seed is None else args.seed
    counts, check = sim.sample_counts(
        model, law, [args.time], args.runs, seed, workers=args.workers, effective_checks=args.effective_checks
    )
    res = sim.EmpiricalResult.from_histogram(args.time, seed, np.bincount(counts[0]))
    if args.format == "csv":
        rows = ["m,probability,std_error"] + [
            f"{m},{fmt_num(p)},{fmt_num(se)}" for m, (p, se) in enumerate(zip(res.distribution, res.std_errors))
        ]
        _emit("\n".join(rows) + "\n", args.out)
    else:
        doc = res.to_dict()
        if check is not None:
            doc["effective_checks"] = check.to_dict()
        _emit(dumps(doc) + "\n", args.out)
    if check is not None and check.violations:
        return EXIT_COMPARE
    return EXIT_OK


def compare_engines(model, law, t_max: int, runs: int = 0, seed: int = 0, workers: int = 1) -> dict:
    """Exact engine vs oracle for every t <= t_max, and vs simulation at t_max."""
    worst = 0.0
    for t in range(t_max + 1):
        a = exact.distribution(exact.transient_pgf(model, law, t))
        b = oracle.brute_distribution(model, law, t)
        n = max(a.size, b.size)
        worst = max(worst, float(np.max(np.abs(np.pad(a, (0, n - a.size)) - np.pad(b, (0, n - b.size))))))
    doc = {"time": t_max, "oracle_max_deviation": worst, "oracle_ok": worst <= ORACLE_TOL}
    if runs:
        emp = sim.empirical_distribution(model, law, t_max, runs, seed, workers)
        p = exact.distribution(exact.transient_pgf(model, law, t_max))
        worst_z = 0.0
        for m, pm in enumerate(p):
            if pm < 1e-3:
                continue
            ph = emp.distribution[m] if m < emp.distribution.size else 0.0
            se = emp.std_errors[m] if m < emp.std_errors.size else 0.0
            z = abs(ph - pm) / se if se > 0 else (0.0 if ph == pm else math.inf)
            worst_z = max(worst_z, z)
        doc.update(runs=runs, seed=seed, empirical_max_z=worst_z, empirical_ok=worst_z <= SE_MULTIPLIER)
    return doc


def cmd_compare(args) -> int:
    model, law = _load(args)
    seed = _default_seed() if args.seed is None else args.seed
    try:
        doc = compare_engines(model, law, args.time, args.runs, seed, args.workers)
    except ValueError as exc:
        raise CliExit(EXIT_MALFORMED, str(exc))
    print(dumps(doc))
    ok = doc["oracle_ok"] and doc.get("empirical_ok", True)
    return EXIT_OK if ok else EXIT_COMPARE


def cmd_mminf(args) -> int:
    if not (0 <= args.p <= 1 and 0 < args.alpha < 1 and args.time >= 0):
        raise CliExit(EXIT_MALFORMED, "need 0 <= p <= 1, 0 < alpha < 1, time >= 0")
    G = exact.mminf_closed_form(args.p, args.alpha, args.time)
    mean, var, fano = exact.mminf_moments(args.p, args.alpha, args.time)
    doc = {"time": args.time, "mean": mean, "variance": var, "fano": fano, "distribution": G.coeffs}
    print(dumps(doc))
    if fano is not None and fano >= 1:
        print(f"internal error: Fano factor {fano!r} is not below 1", file=sys.stderr)
        return EXIT_COMPARE
    return EXIT_OK


def cmd_stationary(args) -> int:
    model, law = _load(args)
    try:
        dist, t = exact.stationary_distribution(model, law, args.tol, args.max_time, args.max_degree)
    except exact.StationaryNotConverged as exc:
        print(dumps({"converged": False, "max_time": exc.t_max, "last_tv": exc.last_tv}))
        return EXIT_NO_CONVERGENCE
    print(dumps({"converged": True, "time": t, "distribution": dist}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transq", description="Transient analysis of discrete-time D-BMAP/G/inf queues")
    sub = parser.add_subparsers(dest="command", required=True)

    with_model = argparse.ArgumentParser(add_help=False)
    with_model.add_argument("model", help="JSON model file")
    with_model.add_argument("--dump-model", metavar="PATH", help="write the parsed model back out as JSON")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=["json", "csv"], default="json")
    output.add_argument("--out", metavar="PATH")

    p = sub.add_parser("validate", parents=[with_model], help="check a model file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", parents=[with_model, output], help="exact distribution at one time")
    p.add_argument("--time", type=int, required=True)
    p.add_argument("--moments", type=int, default=2)
    p.add_argument("--max-degree", type=int)
    p.add_argument("--allow-truncation", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", parents=[with_model, output], help="Monte Carlo estimate at one time")
    p.add_argument("--time", type=int, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, help="default: $TRANSQ_SEED or 0")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--effective-checks", action="store_true", help="also check the effective-process path properties")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[with_model], help="exact vs oracle (and optionally simulation)")
    p.add_argument("--time", type=int, required=True)
    p.add_argument("--runs", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("mminf", help="closed form for Bernoulli arrivals and geometric service")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--time", type=int, required=True)
    p.set_defaults(func=cmd_mminf)

    p = sub.add_parser("stationary", parents=[with_model], help="iterate until the distribution settles")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-time", type=int, default=10000)
    p.add_argument("--max-degree", type=int)
    p.set_defaults(func=cmd_stationary)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliExit as exc:
        if str(exc):
            print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
