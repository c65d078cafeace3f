"""Command-line front end: classify, solve, verify, sweep, kappa, lambda.

Batch semantics for scripting and test harnesses: results go to stdout,
diagnostics to stderr, and the exit code summarizes the outcome

    0  verdict produced / all checks pass
    2  a verification check failed
    3  usage error
    4  numerical failure (no root where existence was expected, several
       roots, divergence)

JSON output carries 17 significant digits for round-trip fidelity; pretty
output rounds to 6.  ``--ell auto`` (the default) selects the separable
coefficient for the given dimension and exponent.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from . import critical, report, shoot, variational
from .params import Params, classify

__all__ = ["main", "entry"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_USAGE = 3
EXIT_NUMERICAL = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _ell_value(text: str) -> float | None:
    if text.strip().lower() == "auto":
        return None
    try:
        return float(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"--ell must be a real number or 'auto', got {text!r}") from e


def _tol_value(text: str) -> float:
    try:
        tol = float(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"--tol must be a real number, got {text!r}") from e
    if not 1e-14 <= tol <= 1e-4:
        raise argparse.ArgumentTypeError(f"--tol must lie in [1e-14, 1e-4], got {tol}")
    return tol


def _build_parser() -> _Parser:
    parser = _Parser(prog="singprof", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"singprof {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, with_q=True):
        sp.add_argument("--dim", type=int, required=True, help="space dimension N >= 2")
        if with_q:
            sp.add_argument("--q", type=float, required=True, help="nonlinearity exponent q > 1")
            sp.add_argument("--ell", type=_ell_value, default=None,
                            help="linear coefficient, or 'auto' for the separable value (default)")
        sp.add_argument("--format", choices=("json", "csv", "pretty"), default=None,
                        help="output format (default: json, classify: pretty)")

    sp = sub.add_parser("classify", help="existence/uniqueness regime verdict")
    common(sp)

    sp = sub.add_parser("solve", help="shoot for the profile; writes trajectory CSV")
    common(sp)
    sp.add_argument("--tol", type=_tol_value, default=1e-10)
    sp.add_argument("--out", default=".", help="directory for the trajectory CSV")
    sp.add_argument("--force", action="store_true",
                    help="attempt the shot even where nonexistence is proved")

    sp = sub.add_parser("verify", help="full verification document for one point")
    common(sp)
    sp.add_argument("--tol", type=_tol_value, default=1e-10)
    sp.add_argument("--out", default=None, help="optional directory for the JSON document")
    sp.add_argument("--force", action="store_true")

    sp = sub.add_parser("sweep", help="verification documents over a q grid")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--q-from", type=float, required=True)
    sp.add_argument("--q-to", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--ell", type=_ell_value, default=None)
    sp.add_argument("--tol", type=_tol_value, default=1e-10)
    sp.add_argument("--out", required=True, help="directory for per-point JSON and index.csv")
    sp.add_argument("--format", choices=("json", "csv", "pretty"), default=None)
    sp.add_argument("--force", action="store_true")

    sp = sub.add_parser("kappa", help="critical-exponent constants for a dimension")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--n-quad", type=int, default=1024)
    sp.add_argument("--format", choices=("json", "csv", "pretty"), default=None)

    sp = sub.add_parser("lambda", help="weighted cap constant at a colatitude")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--theta-c", type=float, required=True)
    sp.add_argument("--n", type=int, default=1024)
    sp.add_argument("--format", choices=("json", "csv", "pretty"), default=None)

    return parser


def _emit(doc: dict, fmt: str, pretty_lines) -> None:
    if fmt == "json":
        print(report.dumps_17g(doc))
    elif fmt == "csv":
        keys, vals = zip(*_flatten(doc))
        print(",".join(keys))
        print(",".join(vals))
    else:
        for line in pretty_lines():
            print(line)


def _flatten(doc: dict, prefix: str = ""):
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, (list, tuple)):
            yield key, '"' + ";".join(str(x) for x in v) + '"'
        elif isinstance(v, float):
            yield key, f"{v:.17g}"
        elif v is None:
            yield key, ""
        else:
            yield key, str(v)


def _cmd_classify(args) -> int:
    p = Params(args.dim, args.q, args.ell)
    rep = classify(p)
    fmt = args.format or "pretty"

    def pretty():
        tags = list(rep.applied_results)
        ex = f"{rep.existence.value} ({tags[0]})" if tags else rep.existence.value
        if len(tags) > 1:
            un = f"{rep.uniqueness.value} ({tags[1]})"
        else:
            un = rep.uniqueness.value
        yield f"{ex}; {un}"
        for note in rep.notes:
            yield f"note: {note}"

    _emit(rep.to_dict(), fmt, pretty)
    return EXIT_OK


def _cmd_solve(args) -> int:
    p = Params(args.dim, args.q, args.ell)
    try:
        sol = shoot.solve_profile(p, args.tol, force=args.force)
    except (shoot.NoRootError, shoot.MultipleRootsError) as e:
        print(f"singprof solve: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"profile_dim{p.dim}_q{p.q:.10g}.csv"
    sol.trajectory.to_csv(csv_path)
    doc = sol.to_dict(trajectory_csv_path=str(csv_path))
    fmt = args.format or "json"

    def pretty():
        yield (
            f"alpha* = {sol.alpha_star:.6g}, boundary slope = {sol.boundary_slope:.6g}"
        )
        yield (
            f"ode residual = {sol.ode_residual_max:.6g}, bc residual = {sol.bc_residual:.6g}"
        )
        yield f"trajectory: {csv_path}"

    _emit(doc, fmt, pretty)
    return EXIT_OK


def _cmd_verify(args) -> int:
    p = Params(args.dim, args.q, args.ell)
    doc = report.verify(p, args.tol, force=args.force)
    d = doc.to_dict()
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / f"verify_dim{p.dim}_q{p.q:.10g}.json").write_text(doc.to_json())
    fmt = args.format or "json"

    def pretty():
        yield f"existence: {d['regime']['existence']}  uniqueness: {d['regime']['uniqueness']}"
        if d["failure"] is not None:
            yield f"FAILURE [{d['failure']['kind']}]: {d['failure']['detail']}"
        for name, c in d["oracle_checks"].items():
            status = "pass" if c["pass"] else "FAIL"
            yield f"{status}  {name} = {c['value']:.6g} (tolerance {c['tolerance']:.6g})"

    _emit(d, fmt, pretty)
    return exit_code_for_doc(d)


def exit_code_for_doc(d: dict) -> int:
    return report.exit_code_for(d)


def _cmd_sweep(args) -> int:
    spec = report.SweepSpec(
        dim=args.dim,
        q_from=args.q_from,
        q_to=args.q_to,
        steps=args.steps,
        ell=args.ell,
        outputs=args.out,
    )
    docs = report.sweep(spec, args.tol, force=args.force)
    fmt = args.format or "pretty"
    codes = [report.exit_code_for(doc.to_dict()) for doc in docs]

    def pretty():
        for doc, code in zip(docs, codes):
            d = doc.to_dict()
            alpha = (d["profile"] or {}).get("alpha_star")
            alpha_txt = f"alpha*={alpha:.6g}" if alpha is not None else "no profile"
            yield (
                f"q={d['params']['q']:.6g}: {d['regime']['existence']}, "
                f"{alpha_txt}, exit={code}"
            )
        yield f"outputs: {args.out}"

    if fmt == "json":
        print(report.dumps_17g([doc.to_dict() for doc in docs]))
    else:
        for line in pretty():
            print(line)
    return max(codes, default=EXIT_OK)


def _cmd_kappa(args) -> int:
    res = critical.kappa(args.dim, args.n_quad)
    fmt = args.format or "json"

    def pretty():
        yield (
            f"N={res.dim}: q1 = {res.q1:.6g}, theta = {res.theta_const:.6g}, "
            f"kappa = {res.kappa:.6g}"
        )

    _emit(res.to_dict(), fmt, pretty)
    return EXIT_OK


def _cmd_lambda(args) -> int:
    est = variational.lambda_cap(args.dim, args.theta_c, args.n)
    fmt = args.format or "json"
    doc = {"N": args.dim, **est.to_dict()}

    def pretty():
        yield f"N={args.dim}, theta_c={est.theta_c:.6g}: lambda = {est.lam:.6g} (n={est.n_grid})"

    _emit(doc, fmt, pretty)
    return EXIT_OK


_COMMANDS = {
    "classify": _cmd_classify,
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "kappa": _cmd_kappa,
    "lambda": _cmd_lambda,
}


def main(argv: list[str] | None = None) -> int:
    """Dispatch a subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"singprof: error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError,) as e:
        print(f"singprof {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except variational.NonConvergenceError as e:
        print(f"singprof {args.command}: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
