"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 market specification or input error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from ._linalg import DEFAULT_ANGLE_TOL, DEFAULT_TOL
from .complements import gram_schmidt, orthogonal_complement
from .errors import MarketRankError, SpecError
from .geometry import arrangement, rank, ranking_partition
from .hedging import kw_decompose, measure_polytope
from .market import evaluate_claim, load_market, parse_expression
from .metrics import MEASURE_CONVENTION, correlation, delta_c, delta_i, eta_metric, mu, phi_metric
from .process import cell_ranks, covariation
from .report import AnalysisReport
from .subspace import as_field, full_field
from .verify import SUITES, run_suites

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_SPEC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p):
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative rank tolerance")
    p.add_argument("--angle-tol", type=float, default=DEFAULT_ANGLE_TOL, help="principal-angle tolerance (radians)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = _Parser(prog="marketrank", description="Rank and completeness analysis of finite markets.")
    parser.add_argument("--version", action="version", version=f"marketrank {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    single = {
        "analyze": "rank, ranking partition, dd table and degrees of completeness",
        "arrange": "arrangement integrand",
        "orthogonalize": "Gram-Schmidt integrand with pairwise orthogonal rows",
        "measures": "per-cell martingale-measure polytopes",
        "hedge": "Kunita-Watanabe decomposition of a terminal claim",
    }
    for name, text in single.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--market", required=True)
        if name == "hedge":
            p.add_argument("--claim", required=True, help="expression in t, W[k] and the market's names")
        _common(p)
    for name, text in {
        "complement": "orthogonal complement of market B inside market A",
        "metrics": "mu, phi and eta between two markets",
        "corr": "incompleteness correlation between two markets",
    }.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--market-a", required=True)
        p.add_argument("--market-b", required=name != "corr")
        _common(p)
    p = sub.add_parser("verify", help="run the randomized invariant suites")
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--suite", action="append", choices=sorted(SUITES), help="restrict to a suite (repeatable)")
    _common(p)
    return parser


def _config(args):
    return {"tol": args.tol, "angle_tol": args.angle_tol, "measure": MEASURE_CONVENTION, "seed": args.seed}


def _load(path):
    try:
        return load_market(path)
    except OSError as exc:
        raise UsageError(f"cannot read market file {path!r}: {exc.strerror}") from None


def _cells(theta, tol):
    dd = cell_ranks(theta, tol)
    freedom = measure_polytope(theta, tol=tol).freedom
    return AnalysisReport.cell_table(theta.tree, dd, dd, freedom)


def _matrix_table(theta):
    return [cell.tolist() for cell in np.asarray(theta.theta)]


def _analyze(args):
    market = _load(args.market)
    theta, tol = market.theta, args.tol
    part = ranking_partition(theta, tol)
    scalars = {
        "rank": rank(theta, tol),
        "delta_c": delta_c(theta, tol),
        "delta_i": delta_i(theta, tol),
        "mu": mu(as_field(theta, tol)),
        "m": market.tree.m,
        "n_assets": theta.n,
    }
    payload = {
        "assets": list(market.asset_names),
        "partition_sizes": part.sizes(),
        "partition_weights": part.weights(),
        "sets": {name: s.cells().tolist() for name, s in sorted(market.sets.items())},
    }
    return AnalysisReport("analyze", _config(args), scalars, _cells(theta, tol), payload)


def _transform(args, fn, key):
    market = _load(args.market)
    out = fn(market.theta, args.tol)
    return AnalysisReport(
        args.command, _config(args), {"rank": rank(out, args.tol)}, _cells(out, args.tol), {key: _matrix_table(out)}
    )


def _measures(args):
    market = _load(args.market)
    poly = measure_polytope(market.theta, tol=args.tol)
    cells = []
    for c in range(market.tree.n_cells):
        cell = poly.cell(c)
        cells.append({"particular": cell.particular.tolist(), "directions": cell.null_basis.tolist()})
    scalars = {"unique": poly.unique, "max_freedom": int(poly.freedom.max())}
    return AnalysisReport(
        "measures", _config(args), scalars, _cells(market.theta, args.tol), {"polytopes": cells}
    )


def _hedge(args):
    market = _load(args.market)
    expr = parse_expression(args.claim, market.spec)
    claim = evaluate_claim(expr, market.spec, market.tree)
    dec = kw_decompose(claim, market.theta, tol=args.tol)
    residual_norm = float(np.abs(dec.residual.theta).max(initial=0.0))
    scalars = {
        "price": dec.price,
        "reconstruction_error": float(np.abs(dec.reconstruct() - claim).max()),
        "residual_norm": residual_norm,
        "residual_covariation": float(np.abs(covariation(market.theta, dec.residual)).max(initial=0.0)),
    }
    payload = {
        "claim": expr.text,
        "alpha": [a[0].tolist() for a in dec.alpha],
        "residual": [r[0].tolist() for r in dec.residual.theta],
    }
    return AnalysisReport("hedge", _config(args), scalars, _cells(market.theta, args.tol), payload)


def _pair(args):
    a = _load(args.market_a)
    b = _load(args.market_b) if args.market_b else None
    return a, b


def _complement(args):
    a, b = _pair(args)
    comp = orthogonal_complement(a.theta, b.theta, args.tol)
    scalars = {"rank": rank(comp, args.tol), "mu": mu(as_field(comp, args.tol))}
    cells = _cells(comp, args.tol)
    return AnalysisReport("complement", _config(args), scalars, cells, {"complement": _matrix_table(comp)})


def _metrics(args):
    a, b = _pair(args)
    A, B = as_field(a.theta, args.tol), as_field(b.theta, args.tol)
    scalars = {
        "mu_a": mu(A),
        "mu_b": mu(B),
        "phi": phi_metric(A, B),
        "eta": eta_metric(A, B, args.angle_tol),
    }
    return AnalysisReport("metrics", _config(args), scalars, _cells(a.theta, args.tol))


def _corr(args):
    a, b = _pair(args)
    A = as_field(a.theta, args.tol)
    if b is None:
        B, against = full_field(a.tree), "driver"
    else:
        B, against = as_field(b.theta, args.tol), "market-b"
    scalars = {"correlation": correlation(A, B, args.angle_tol), "against": against}
    return AnalysisReport("corr", _config(args), scalars, _cells(a.theta, args.tol))


def _verify(args):
    if args.cases < 1:
        raise UsageError("--cases must be positive")
    results = run_suites(args.cases, args.seed, args.suite)
    suites = [r.to_dict() for r in results]
    failed = sum(not r.ok for r in results)
    report = AnalysisReport("verify", _config(args), {"suites": len(results), "failed": failed}, suites=suites)
    report.config["cases"] = args.cases
    return report


COMMANDS = {
    "analyze": _analyze,
    "arrange": lambda a: _transform(a, arrangement, "arrangement"),
    "orthogonalize": lambda a: _transform(a, gram_schmidt, "orthogonalized"),
    "measures": _measures,
    "hedge": _hedge,
    "complement": _complement,
    "metrics": _metrics,
    "corr": _corr,
    "verify": _verify,
}


def _fail(code, kind, message, as_json, extra=None):
    if as_json:
        body = {"error": kind, "message": message, "exit_code": code}
        body.update(extra or {})
        sys.stderr.write(json.dumps(body, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"marketrank: {kind}: {message}\n")
    return code


def _wants_json(argv):
    """Format choice before parsing, so usage errors follow it too."""
    for i, arg in enumerate(argv):
        if arg == "--format" and i + 1 < len(argv):
            return argv[i + 1] != "csv"
        if arg.startswith("--format="):
            return arg.split("=", 1)[1] != "csv"
    return True


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    as_json = _wants_json(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        as_json = args.format == "json"
        report = COMMANDS[args.command](args)
    except UsageError as exc:
        if not as_json:
            parser.print_usage(sys.stderr)
        return _fail(EXIT_USAGE, "usage", str(exc), as_json)
    except SpecError as exc:
        return _fail(EXIT_SPEC, type(exc).__name__, exc.message, as_json, {"line": exc.line, "column": exc.column})
    except MarketRankError as exc:
        return _fail(EXIT_SPEC, type(exc).__name__, str(exc), as_json)

    text = report.to_json() if args.format == "json" else report.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify" and report.scalars["failed"]:
        return _fail(EXIT_VERIFY, "verification", f"{report.scalars['failed']} suite(s) failed", as_json)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
