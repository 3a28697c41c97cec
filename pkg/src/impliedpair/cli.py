"""
Command-line entry point.

stdout carries only JSON (single results) or summaries of CSV sweeps;
diagnostics go to stderr. Exit codes: 0 ok, 2 bad arguments, 3 pricing or
I/O error, 4 no root, 5 multiple roots, 6 Monte Carlo check failed.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import binomial as binom
from .bs_core import BsInputs, OptionKind, bs_price
from .calibrate import OptionQuote, SolverConfig, implied_pair
from .errors import IdenticalStrikes, MultipleRoots, NoRoot
from .mc_verify import lemma1_check, load_spec
from .mixture import PRESETS, load_model, mixture_price
from .surface import implied_surface, parse_range, smile_slice, write_csv

EXIT_OK, EXIT_USAGE, EXIT_ERROR, EXIT_NO_ROOT, EXIT_MULTI, EXIT_MC = 0, 2, 3, 4, 5, 6


class UsageError(Exception):
    pass


def _emit(obj):
    sys.stdout.write(json.dumps(obj, indent=None, sort_keys=True) + "\n")


def _model_from_args(args):
    if getattr(args, "model", None):
        try:
            return load_model(args.model)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load model {args.model}: {exc}") from exc
    if getattr(args, "preset", None):
        return PRESETS[args.preset]
    return None


def _pair_json(res):
    return {"sigma_imp": res.sigma_imp, "rho_imp": res.rho_imp, "status": res.status,
            "residuals": list(res.residuals), "iterations": res.iterations}


def cmd_price(args):
    kind = OptionKind.parse(args.kind)
    model = _model_from_args(args)
    if model is not None:
        price = mixture_price(model, kind, args.strike)
    else:
        missing = [f for f in ("spot", "tau", "sigma", "rho") if getattr(args, f) is None]
        if missing:
            raise UsageError("missing " + ", ".join("--" + m for m in missing))
        try:
            inputs = BsInputs(args.spot, args.strike, args.tau, args.sigma, args.rho)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        price = bs_price(kind, inputs)
    _emit({"kind": kind.value, "strike": args.strike, "price": price})
    return EXIT_OK


def _quotes_from_args(args):
    model = _model_from_args(args)
    if args.quotes:
        try:
            with open(args.quotes) as fh:
                doc = json.load(fh)
            spot = float(doc["spot"])
            qs = [OptionQuote(q.get("kind", "call"), float(q["strike"]), float(q["tau"]),
                              float(q["price"])) for q in doc["quotes"]]
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"cannot read quotes file: {exc}") from exc
        if len(qs) != 2:
            raise UsageError("quotes file must hold exactly two quotes")
        return qs[0], qs[1], spot
    if args.k1 is None or args.k2 is None:
        raise UsageError("--k1 and --k2 are required")
    if args.k1 == args.k2 and args.kind1 == args.kind2:
        raise UsageError("strikes must differ")
    if model is not None:
        q1 = OptionQuote(args.kind1, args.k1, model.tau, mixture_price(model, args.kind1, args.k1))
        q2 = OptionQuote(args.kind2, args.k2, model.tau, mixture_price(model, args.kind2, args.k2))
        return q1, q2, model.spot
    if None in (args.p1, args.p2, args.tau):
        raise UsageError("give --p1, --p2 and --tau, or a --preset/--model")
    try:
        return (OptionQuote(args.kind1, args.k1, args.tau, args.p1),
                OptionQuote(args.kind2, args.k2, args.tau, args.p2), args.spot)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_calibrate(args):
    q1, q2, spot = _quotes_from_args(args)
    try:
        res = implied_pair(q1, q2, spot, SolverConfig())
    except IdenticalStrikes as exc:
        raise UsageError(str(exc)) from exc
    except MultipleRoots as exc:
        _emit({"status": "multiple_roots", "roots": [list(r) for r in exc.roots]})
        return EXIT_MULTI
    except NoRoot as exc:
        _emit({"status": "no_root", "message": str(exc)})
        return EXIT_NO_ROOT
    _emit(_pair_json(res))
    return EXIT_OK


def _summary(cells, path):
    n_conv = sum(c.converged for c in cells)
    _emit({"cells": len(cells), "converged": n_conv, "output": path})


def cmd_smile(args):
    model = _model_from_args(args)
    if model is None:
        raise UsageError("give --preset or --model")
    try:
        k1s = parse_range(args.k1_range)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cells = smile_slice(model, k1s, args.k2, workers=args.workers)
    try:
        write_csv(cells, args.output)
    except OSError as exc:
        print(f"cannot write {args.output}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    _summary(cells, args.output)
    return EXIT_OK


def cmd_surface(args):
    model = _model_from_args(args)
    if model is None:
        raise UsageError("give --preset or --model")
    try:
        axis = parse_range(args.range)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    grid = implied_surface(model, axis, axis, workers=args.workers)
    # diagonal cells are structurally degenerate and not emitted
    cells = [c for c in grid.rows() if c.status != "degenerate"]
    try:
        write_csv(cells, args.output)
    except OSError as exc:
        print(f"cannot write {args.output}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    _summary(cells, args.output)
    return EXIT_OK


def cmd_verify_lemma1(args):
    try:
        spec = load_spec(args.spec)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed path spec: {exc}") from exc
    if args.n_paths < 100:
        raise UsageError("--n-paths must be >= 100")
    rep = lemma1_check(spec, args.kind, args.strike, args.n_paths, args.seed, args.antithetic)
    _emit(rep.to_dict())
    return EXIT_OK if abs(rep.z_score) <= args.z_max else EXIT_MC


def cmd_binomial(args):
    if args.eps is not None and not 0 < args.eps < 1:
        raise UsageError("--eps must lie in (0, 1)")
    if args.action == "price":
        if args.eps is None or args.strike is None:
            raise UsageError("price needs --eps and --strike")
        try:
            model = binom.BinomialModel(args.rho, args.eps, args.periods, args.spot)
        except (ValueError, OverflowError) as exc:
            raise UsageError(str(exc)) from exc
        price = binom.binomial_price(model, args.kind, args.strike)
        _emit({"kind": OptionKind.parse(args.kind).value, "strike": args.strike,
               "price": price})
        return EXIT_OK
    if None in (args.p1, args.p2, args.k1, args.k2):
        raise UsageError("implied needs --p1 --p2 --k1 --k2")
    try:
        res = binom.implied_rho_eps(args.p1, args.p2, args.k1, args.k2, args.spot, args.periods)
    except IdenticalStrikes as exc:
        raise UsageError(str(exc)) from exc
    except MultipleRoots as exc:
        _emit({"status": "multiple_roots", "roots": [list(r) for r in exc.roots]})
        return EXIT_MULTI
    except NoRoot as exc:
        _emit({"status": "no_root", "message": str(exc)})
        return EXIT_NO_ROOT
    _emit({"rho": res.rho_imp, "eps": res.sigma_imp, "status": res.status,
           "residuals": list(res.residuals), "iterations": res.iterations})
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _finite(text):
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not a finite number: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="impliedpair", description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_flags(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--preset", choices=sorted(PRESETS))
        g.add_argument("--model", help="mixture JSON file")

    sp = sub.add_parser("price", help="Black-Scholes or mixture price")
    sp.add_argument("--kind", default="call", choices=["call", "put"])
    sp.add_argument("--strike", type=_finite, required=True)
    for f in ("spot", "tau", "sigma", "rho"):
        sp.add_argument("--" + f, type=_finite)
    model_flags(sp)
    sp.set_defaults(func=cmd_price)

    sp = sub.add_parser("calibrate", help="implied volatility and average rate from two quotes")
    sp.add_argument("--quotes", help="JSON file {spot, quotes: [{kind, strike, tau, price}] x2}")
    sp.add_argument("--spot", type=_finite, default=1.0)
    sp.add_argument("--tau", type=_finite)
    sp.add_argument("--k1", type=_finite)
    sp.add_argument("--k2", type=_finite)
    sp.add_argument("--p1", type=_finite)
    sp.add_argument("--p2", type=_finite)
    sp.add_argument("--kind1", default="call", choices=["call", "put"])
    sp.add_argument("--kind2", default="call", choices=["call", "put"])
    model_flags(sp)
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("smile", help="implied pair along K1 at fixed K2 (CSV)")
    model_flags(sp)
    sp.add_argument("--k2", type=_finite, required=True)
    sp.add_argument("--k1-range", default="0.7:1.25:0.05")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_smile)

    sp = sub.add_parser("surface", help="implied pair over a (K1, K2) grid (CSV)")
    model_flags(sp)
    sp.add_argument("--range", default="0.8:1.4:0.1")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_surface)

    sp = sub.add_parser("binomial", help="lattice price or implied (rho, eps)")
    sp.add_argument("action", choices=["price", "implied"])
    sp.add_argument("--kind", default="call", choices=["call", "put"])
    sp.add_argument("--rho", type=_finite, default=1.0)
    sp.add_argument("--eps", type=_finite)
    sp.add_argument("--periods", type=int, default=1)
    sp.add_argument("--spot", type=_finite, default=1.0)
    sp.add_argument("--strike", type=_finite)
    for f in ("k1", "k2", "p1", "p2"):
        sp.add_argument("--" + f, type=_finite)
    sp.set_defaults(func=cmd_binomial)

    sp = sub.add_parser("verify-lemma1", help="Monte Carlo check of averaged-parameter pricing")
    sp.add_argument("--spec", required=True, help="path-spec JSON file")
    sp.add_argument("--kind", default="call", choices=["call", "put"])
    sp.add_argument("--strike", type=_finite, default=1.0)
    sp.add_argument("--n-paths", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--z-max", type=float, default=4.0)
    sp.add_argument("--antithetic", action="store_true")
    sp.set_defaults(func=cmd_verify_lemma1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pricing failures and the like
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
