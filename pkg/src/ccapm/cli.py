"""Command-line interface: ``ccapm <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import calibration as cal
from . import checks, lucas, model, moments, risk
from .errors import DataError, NumericalError
from .io import load_series, load_summary
from .reports import file_digest
from .model import TABLE1, GrowthMoments, Preferences, SufficiencyFactors
from .reports import ReportDocument

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _delimiter(text: str) -> str:
    return {"tab": "\t", "\\t": "\t", "comma": ","}.get(text, text)


def _add_output(p):
    p.add_argument("--out", type=Path, help="write to this file instead of stdout")
    p.add_argument("--no-timestamp", action="store_true", help="omit generated_at")
    p.add_argument("--display-decimals", type=int, default=6, metavar="N")


def _add_series_opts(p):
    p.add_argument("--delimiter", type=_delimiter, help="field delimiter (default: auto)")
    p.add_argument("--decimal", default=".", help="decimal mark (default '.')")
    p.add_argument("--ddof", type=int, choices=(0, 1), default=0,
                   help="variance divisor n - ddof (default 0)")


def _add_source(p, allow_explicit=False):
    g = p.add_mutually_exclusive_group(required=not allow_explicit)
    g.add_argument("--table1", action="store_true", help="built-in U.S. 1889-1978 summary")
    g.add_argument("--summary", type=Path, help="JSON file with summary statistics")
    g.add_argument("--series", type=Path, help="delimited annual series")
    _add_series_opts(p)
    if allow_explicit:
        p.add_argument("--mu-x", type=float, help="mean of log consumption growth")
        p.add_argument("--var-x", type=float, help="variance of log consumption growth")


def _add_prefs(p, rho_default=None):
    p.add_argument("--beta", type=float, default=0.99)
    p.add_argument("--zeta", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--rho", type=float, required=rho_default is None, default=rho_default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccapm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("moments", help="growth moments and summary statistics")
    _add_source(p)
    _add_output(p)

    p = sub.add_parser("calibrate", help="solve for (zeta, xi, rho)")
    _add_source(p)
    p.add_argument("--beta", type=float, default=0.99)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--rho", type=float, help="pin rho and solve the rest in closed form")
    mode.add_argument("--initial", type=_floats, metavar="LNZETA,LNXI,RHO",
                      help=f"initial guess for the full solver (default {cal.DEFAULT_INITIAL})")
    p.add_argument("--rounded", action="store_true",
                   help="round targets and moments to six decimals first")
    p.add_argument("--max-iter", type=int, default=200)
    _add_output(p)

    p = sub.add_parser("price", help="closed-form asset prices")
    _add_source(p, allow_explicit=True)
    _add_prefs(p)
    _add_output(p)

    p = sub.add_parser("classify", help="classify risk behaviour")
    p.add_argument("--certain-utility", type=float)
    p.add_argument("--expected-utility", type=float)
    p.add_argument("--wealth", type=float, help="certain wealth (with --future-wealth, --rho)")
    p.add_argument("--future-wealth", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--beta", type=float, default=0.99)
    p.add_argument("--eta", type=float, required=True)
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte-Carlo check of the pricing formulas")
    _add_source(p, allow_explicit=True)
    _add_prefs(p)
    p.add_argument("--draws", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chunk", type=int, help="draws per substream (default: all)")
    p.add_argument("--workers", type=int, default=1)
    _add_output(p)

    p = sub.add_parser("curves", help="utility curve table (w, u, eta_u, beta_eta_u)")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.99)
    p.add_argument("--wmin", type=float, default=0.5)
    p.add_argument("--wmax", type=float, default=5.0)
    p.add_argument("--points", type=int, default=46)
    p.add_argument("--delimiter", type=_delimiter, default=",")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("check", help="run the invariant suite")
    _add_output(p)
    return parser


def _series_inputs(args) -> dict:
    return {"path": str(args.series), "sha256": file_digest(args.series),
            "delimiter": args.delimiter, "decimal": args.decimal, "ddof": args.ddof}


def _load_series(args):
    return load_series(args.series, delimiter=args.delimiter, decimal=args.decimal)


def _summary_from_source(args):
    """Return (EconomySummary, inputs dict) for --table1/--summary/--series."""
    if args.table1:
        return TABLE1, {"source": "table1"}
    if args.summary is not None:
        return load_summary(args.summary), {
            "source": "summary", "path": str(args.summary), "sha256": file_digest(args.summary)}
    series = _load_series(args)
    return moments.summarize(series, ddof=args.ddof), {"source": "series", **_series_inputs(args)}


def _moments_from_source(args):
    if getattr(args, "mu_x", None) is not None or getattr(args, "var_x", None) is not None:
        if args.mu_x is None or args.var_x is None or args.table1 or args.summary or args.series:
            raise UsageError("--mu-x and --var-x go together and replace --table1/--summary/--series")
        return GrowthMoments.equilibrium(args.mu_x, args.var_x), {
            "source": "explicit", "mu_x": args.mu_x, "var_x": args.var_x}
    if args.series is not None:
        series = _load_series(args)
        return moments.estimate_moments(series, ddof=args.ddof), {
            "source": "series", **_series_inputs(args)}
    if not (args.table1 or args.summary):
        raise UsageError("give one of --table1, --summary, --series or --mu-x/--var-x")
    summary, inputs = _summary_from_source(args)
    return moments.summary_moments(summary), inputs


def _moments_dict(m: GrowthMoments) -> dict:
    return {"mu_x": m.mu_x, "var_x": m.var_x, "mu_z": m.mu_z, "var_z": m.var_z,
            "cov_xz": m.cov_xz, "mean_growth": m.mean_growth}


def _summary_dict(s) -> dict:
    return {"mean_equity_return": s.mean_equity_return, "risk_free_rate": s.risk_free_rate,
            "mean_growth": s.mean_growth, "sd_growth": s.sd_growth,
            "mean_premium": s.mean_premium}


def cmd_moments(args):
    if args.series is not None:
        series = _load_series(args)
        m = moments.estimate_moments(series, ddof=args.ddof)
        has_returns = series.equity_return is not None and series.rf_return is not None
        s = moments.summarize(series, ddof=args.ddof) if has_returns else None
        inputs = {"source": "series", **_series_inputs(args)}
    else:
        s, inputs = _summary_from_source(args)
        m = moments.summary_moments(s)
    payload = {"growth_moments": _moments_dict(m),
               "summary": None if s is None else _summary_dict(s)}
    return "moments", inputs, payload


def cmd_calibrate(args):
    summary, inputs = _summary_from_source(args)
    targets = cal.build_targets(summary, args.beta)
    if args.rounded:
        targets = targets.rounded()
    inputs.update(beta=args.beta, rounded=args.rounded)
    if args.rho is not None:
        result = cal.pinned_result(args.rho, targets)
        inputs["rho"] = args.rho
    else:
        initial = args.initial or cal.DEFAULT_INITIAL
        if len(initial) != 3:
            raise UsageError("--initial takes exactly three numbers: lnzeta,lnxi,rho")
        inputs.update(initial=list(initial), max_iter=args.max_iter)
        result = cal.solve_full(initial, targets, cal.SolverOptions(max_iter=args.max_iter))
    payload = {
        "targets": {"t1": targets.t1, "t2": targets.t2, "t3": targets.t3,
                    "mu_x": targets.moments.mu_x, "var_x": targets.moments.var_x,
                    "beta": targets.beta},
        "result": result.as_dict(),
    }
    return "calibration", inputs, payload


def cmd_price(args):
    m, inputs = _moments_from_source(args)
    prefs = Preferences(args.beta, args.rho)
    factors = SufficiencyFactors(args.zeta, args.xi)
    inputs.update(beta=args.beta, zeta=args.zeta, xi=args.xi, rho=args.rho)
    payload = model.price(prefs, factors, m)
    payload["moments"] = _moments_dict(m)
    return "pricing", inputs, payload


def cmd_classify(args):
    utilities = args.certain_utility is not None or args.expected_utility is not None
    wealth = args.wealth is not None or args.future_wealth is not None
    if utilities == wealth:
        raise UsageError("give either --certain-utility/--expected-utility "
                         "or --wealth/--future-wealth/--rho")
    if utilities:
        if args.certain_utility is None or args.expected_utility is None:
            raise UsageError("--certain-utility and --expected-utility go together")
        a = risk.classify(args.certain_utility, args.expected_utility, args.beta, args.eta)
        inputs = {"certain_utility": args.certain_utility,
                  "expected_utility": args.expected_utility}
    else:
        if args.wealth is None or args.future_wealth is None or args.rho is None:
            raise UsageError("--wealth, --future-wealth and --rho go together")
        a = risk.classify_wealth(args.wealth, args.future_wealth, args.rho, args.beta, args.eta)
        inputs = {"wealth": args.wealth, "future_wealth": args.future_wealth, "rho": args.rho}
    inputs.update(beta=args.beta, eta=args.eta)
    return "classification", inputs, a.as_dict()


def cmd_simulate(args):
    m, inputs = _moments_from_source(args)
    cfg = lucas.SimulationConfig(m, Preferences(args.beta, args.rho),
                                 SufficiencyFactors(args.zeta, args.xi),
                                 draws=args.draws, seed=args.seed, chunk=args.chunk)
    # workers is deliberately not an input: it cannot change the result
    inputs.update(beta=args.beta, zeta=args.zeta, xi=args.xi, rho=args.rho,
                  draws=args.draws, seed=args.seed, chunk=cfg.chunk)
    return "simulation", inputs, lucas.simulate(cfg, workers=args.workers).as_dict()


def cmd_check(args):
    results = checks.run_checks()
    for r in results:
        print(r.line(), file=sys.stderr)
    payload = {"checks": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                          for r in results],
               "passed": all(r.passed for r in results)}
    return "check", {}, payload


def cmd_curves(args):
    grid = risk.wealth_grid(args.wmin, args.wmax, args.points)
    rows = risk.curve_samples(args.rho, args.eta, args.beta, grid)
    return risk.format_curve_table(rows, args.delimiter)


COMMANDS = {"moments": cmd_moments, "calibrate": cmd_calibrate, "price": cmd_price,
            "classify": cmd_classify, "simulate": cmd_simulate, "check": cmd_check}


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _command_echo(argv) -> list:
    # the output path does not affect content; keep it out of the echo
    echo, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        echo.append(a)
    return echo


def run_cli(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "curves":
            _emit(cmd_curves(args), args.out)
            return EXIT_OK
        kind, inputs, payload = COMMANDS[args.command](args)
        if args.display_decimals < 0:
            raise UsageError("--display-decimals must be non-negative")
        doc = ReportDocument.build(kind, _command_echo(argv), inputs, payload,
                                   places=args.display_decimals,
                                   timestamp=not args.no_timestamp)
        _emit(doc.to_json(), args.out)
        if kind == "check" and not payload["passed"]:
            return EXIT_NUMERICAL
        return EXIT_OK
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"ccapm: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"ccapm: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
