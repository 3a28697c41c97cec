"""
Joint calibration of implied volatility and implied average forward rate.

Two option prices on the same underlying and expiry pin down the pair
``(sigma_imp, rho_imp)`` that reproduces both under Black-Scholes. The
solve is nested: for a trial rate ``rho`` the first quote gives the ordinary
(conditional) implied volatility ``sigma_1(rho)``; the outer scalar equation

    g(rho) = H_BS(sigma_1(rho), rho, K_2) - P_2 = 0

is then scanned over the admissible rates and every sign change refined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .bs_core import OptionKind, _price, _vega, discount_bounds
from .errors import (BracketExhausted, CalibrationError, IdenticalStrikes, InnerFailure,
                     MultipleRoots, NoRoot, PriceOutOfBounds)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class OptionQuote:
    """One observed European option price."""

    kind: OptionKind
    strike: float
    tau: float
    price: float

    def __post_init__(self):
        object.__setattr__(self, "kind", OptionKind.parse(self.kind))
        if not self.strike > 0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.price > 0:
            raise ValueError(f"price must be positive, got {self.price}")


@dataclass(frozen=True)
class SolverConfig:
    sigma_bracket: tuple[float, float] = (1e-8, 10.0)
    rho_bracket: tuple[float, float] = (-1.0, 2.0)
    price_tol: float = 1e-10
    max_iter: int = 200
    outer_scan_points: int = 64

    def __post_init__(self):
        lo, hi = self.sigma_bracket
        if not 0 < lo < hi:
            raise ValueError(f"invalid sigma_bracket {self.sigma_bracket}")
        lo, hi = self.rho_bracket
        if not lo < hi:
            raise ValueError(f"invalid rho_bracket {self.rho_bracket}")
        if not self.price_tol > 0:
            raise ValueError("price_tol must be positive")
        if self.max_iter < 1 or self.outer_scan_points < 2:
            raise ValueError("max_iter >= 1 and outer_scan_points >= 2 required")


@dataclass(frozen=True)
class RhoInterval:
    """Sub-interval of rates; ``lo_open``/``hi_open`` mark excluded endpoints."""

    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    @property
    def empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and (self.lo_open or self.hi_open)

    def __contains__(self, rho: float) -> bool:
        if self.empty:
            return False
        above = rho > self.lo if self.lo_open else rho >= self.lo
        below = rho < self.hi if self.hi_open else rho <= self.hi
        return above and below


EMPTY_INTERVAL = RhoInterval(1.0, 0.0)


@dataclass
class BracketReport:
    """What the outer scan saw."""

    interval: RhoInterval
    scanned: int = 0
    excluded: list = field(default_factory=list)
    sign_changes: int = 0
    roots: list = field(default_factory=list)


@dataclass
class ImpliedPair:
    sigma_imp: float
    rho_imp: float
    residuals: tuple[float, float]
    iterations: int
    bracket_report: Optional[BracketReport] = None
    status: str = "converged"


@dataclass
class TermStructureFit:
    """Solution of the three-quote system with ``sigma_2 == sigma_3``."""

    sigma1: float
    sigma2: float
    rho: float
    residuals: tuple[float, float, float]
    pair: ImpliedPair

    def __iter__(self):
        return iter((self.sigma1, self.sigma2, self.rho))


def _solve_increasing(f, dfdx, lo, hi, x0, max_iter):
    """Safeguarded Newton on an increasing function with ``f(lo) < 0 < f(hi)``.

    Iterates until the Newton step is at rounding level, so the result is
    accurate to a few ulps. Returns ``(x, f(x), iterations)``.
    """
    x = min(max(x0, lo), hi)
    best_x, best_f = x, math.inf
    for it in range(1, max_iter + 1):
        fx = f(x)
        if abs(fx) < abs(best_f):
            best_x, best_f = x, fx
        if fx == 0.0:
            return x, fx, it
        if fx < 0:
            lo = x
        else:
            hi = x
        d = dfdx(x) if dfdx is not None else 0.0
        x_new = x - fx / d if d > 0 else math.nan
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4 * _EPS * abs(x) or hi - lo <= 4 * _EPS * abs(x):
            return best_x, best_f, it
        x = x_new
    return best_x, best_f, max_iter


def check_arbitrage_box(quote: OptionQuote, spot: float, rho_bracket: Sequence[float],
                        margin: float = 0.0) -> RhoInterval:
    """Rates in ``rho_bracket`` at which the quote lies strictly inside its static bounds.

    ``margin`` widens the forbidden zone: the price must clear each bound by
    more than ``margin``. An empty result is returned, not raised.
    """
    lo, hi = float(rho_bracket[0]), float(rho_bracket[1])
    p, k, tau = quote.price, quote.strike, quote.tau
    if quote.kind is OptionKind.CALL:
        # upper bound (spot) does not depend on rho
        if not (p + margin < spot and p > margin):
            return EMPTY_INTERVAL
        gap = spot - p - margin
        # x - K e^{-rho tau} < P - margin  <=>  rho < -ln((x - P + margin)/K)/tau
        rho_star = -math.log(gap / k) / tau
        if rho_star <= lo:
            return EMPTY_INTERVAL
        if rho_star <= hi:
            return RhoInterval(lo, rho_star, hi_open=True)
        return RhoInterval(lo, hi)
    # put: P + margin < K e^{-rho tau}  and  K e^{-rho tau} - x < P - margin
    if not p > margin:
        return EMPTY_INTERVAL
    rho_up = math.log(k / (p + margin)) / tau
    rho_down = -math.log((p - margin + spot) / k) / tau
    new_lo, lo_open = (rho_down, True) if rho_down >= lo else (lo, False)
    new_hi, hi_open = (rho_up, True) if rho_up <= hi else (hi, False)
    out = RhoInterval(new_lo, new_hi, lo_open, hi_open)
    return EMPTY_INTERVAL if out.empty else out


def _conditional_vol(quote, spot, rho, cfg):
    """Inner solve; returns ``(sigma, residual, iterations)``."""
    lower, upper = discount_bounds(quote.kind, spot, quote.strike, quote.tau, rho)
    p = quote.price
    if not (lower + cfg.price_tol < p < upper - cfg.price_tol):
        raise PriceOutOfBounds(
            f"price {p!r} not strictly inside ({lower!r}, {upper!r}) at rho={rho!r}")
    is_call = quote.kind is OptionKind.CALL
    k, tau = quote.strike, quote.tau
    s_lo, s_hi = cfg.sigma_bracket

    def f(s):
        return _price(is_call, spot, k, tau, s, rho) - p

    f_lo, f_hi = f(s_lo), f(s_hi)
    if f_lo > 0 or f_hi < 0:
        raise BracketExhausted(
            f"implied volatility outside [{s_lo}, {s_hi}] at rho={rho!r}")
    if f_lo == 0:
        return s_lo, 0.0, 1
    if f_hi == 0:
        return s_hi, 0.0, 1
    # inflection point of price in sigma: Newton from here is monotone
    x0 = math.sqrt(2.0 * abs(math.log(spot / k) + rho * tau) / tau) or 0.2
    sigma, resid, iters = _solve_increasing(
        f, lambda s: _vega(spot, k, tau, s, rho), s_lo, s_hi, x0, cfg.max_iter)
    if abs(resid) > cfg.price_tol:
        raise InnerFailure(f"conditional volatility did not converge at rho={rho!r}")
    return sigma, resid, iters


def implied_vol_given_rho(quote: OptionQuote, spot: float, rho: float,
                          cfg: Optional[SolverConfig] = None) -> float:
    """Standard (conditional) implied volatility at an assumed average rate ``rho``.

    Raises PriceOutOfBounds when the quote is not strictly inside its static
    bounds at this rate (by more than ``cfg.price_tol``), and BracketExhausted
    when the root lies outside ``cfg.sigma_bracket``.
    """
    cfg = cfg or SolverConfig()
    return _conditional_vol(quote, spot, rho, cfg)[0]


def _scan_points(interval, n):
    lo, hi = interval.lo, interval.hi
    width = hi - lo
    pts = list(np.linspace(lo, hi, n))
    # conditional vol collapses at an open end; cluster extra points there so
    # a root sitting closer to the boundary than the grid spacing is not missed
    offsets = width * np.logspace(-2, -12, 11)
    if interval.hi_open:
        pts = pts[:-1] + list(hi - offsets) + [hi - 4 * _EPS * max(1.0, abs(hi))]
    if interval.lo_open:
        pts = [lo + 4 * _EPS * max(1.0, abs(lo))] + list(lo + offsets) + pts[1:]
    return sorted({float(p) for p in pts if p in interval})


def nested_solve(inner: Callable[[float], tuple[float, float, int]],
                 outer: Callable[[float, float], float],
                 interval: RhoInterval, cfg: SolverConfig):
    """Scan ``outer(inner(y), y)`` over ``interval`` and refine each sign change.

    ``inner(y)`` returns ``(x, residual, iterations)`` and may raise; failing
    points are dropped from the scan. Returns ``(x, y, residual1, iterations,
    report)`` for the unique root, raising NoRoot, MultipleRoots or
    InnerFailure otherwise.
    """
    report = BracketReport(interval)
    if interval.empty:
        raise InnerFailure("no rate in the bracket admits the first quote")
    ys = _scan_points(interval, cfg.outer_scan_points)
    report.scanned = len(ys)
    gs = []
    for y in ys:
        try:
            x, _, _ = inner(y)
            gs.append(outer(x, y))
        except (PriceOutOfBounds, BracketExhausted, InnerFailure) as exc:
            report.excluded.append((y, type(exc).__name__))
            gs.append(None)
    if sum(g is not None for g in gs) < 2 and not any(g == 0.0 for g in gs if g is not None):
        raise InnerFailure(
            f"conditional solve failed at {len(report.excluded)} of {len(ys)} scanned rates")

    brackets, exact = [], []
    for i, (y, g) in enumerate(zip(ys, gs)):
        if g is None:
            continue
        if g == 0.0:
            exact.append(y)
            continue
        if i + 1 < len(ys) and gs[i + 1] is not None and gs[i + 1] != 0.0 and g * gs[i + 1] < 0:
            brackets.append((y, ys[i + 1]))
    report.sign_changes = len(brackets) + len(exact)
    if not report.sign_changes:
        raise NoRoot("outer equation has no sign change over the admissible rates")

    def g_only(y):
        x, _, _ = inner(y)
        return outer(x, y)

    total_iter = 0
    roots = list(exact)
    for a, b in brackets:
        try:
            y, res = brentq(g_only, a, b, xtol=1e-300, rtol=4 * _EPS, maxiter=cfg.max_iter,
                            full_output=True, disp=False)
        except (PriceOutOfBounds, BracketExhausted, InnerFailure) as exc:
            report.excluded.append(((a, b), type(exc).__name__))
            continue
        total_iter += res.iterations
        roots.append(y)
    roots.sort()
    distinct = []
    for y in roots:
        if not distinct or abs(y - distinct[-1]) > 1e-9 * (1.0 + abs(y)):
            distinct.append(y)
    report.roots = distinct
    if not distinct:
        raise InnerFailure("every bracketed root failed in the conditional solve")
    if len(distinct) > 1:
        cands = [(inner(y)[0], y) for y in distinct]
        raise MultipleRoots(f"{len(distinct)} roots found", cands)
    y = distinct[0]
    x, res1, _ = inner(y)
    return x, y, res1, total_iter, report


def _check_pair(q1, q2):
    if q1.tau != q2.tau:
        raise ValueError(f"quotes must share the expiry, got {q1.tau} and {q2.tau}")
    if q1.strike == q2.strike and q1.kind is q2.kind:
        raise IdenticalStrikes(f"both quotes have strike {q1.strike} and kind {q1.kind.value}")


def implied_pair(q1: OptionQuote, q2: OptionQuote, spot: float,
                 cfg: Optional[SolverConfig] = None) -> ImpliedPair:
    """Solve both pricing equations for ``(sigma_imp, rho_imp)``.

    Parameters
    ----------
    q1, q2 : OptionQuote
        Quotes with a common expiry and distinct strikes (or kinds). ``q1``
        drives the conditional volatility solve.
    spot : float
        Current underlying price.
    cfg : SolverConfig, optional

    Returns
    -------
    ImpliedPair
        With both price residuals within ``cfg.price_tol``.

    Raises
    ------
    IdenticalStrikes, NoRoot, MultipleRoots, InnerFailure
    """
    cfg = cfg or SolverConfig()
    _check_pair(q1, q2)
    if not spot > 0:
        raise ValueError(f"spot must be positive, got {spot}")
    interval = check_arbitrage_box(q1, spot, cfg.rho_bracket, margin=cfg.price_tol)
    is_call2 = q2.kind is OptionKind.CALL

    def inner(rho):
        return _conditional_vol(q1, spot, rho, cfg)

    def outer(sigma, rho):
        return _price(is_call2, spot, q2.strike, q2.tau, sigma, rho) - q2.price

    sigma, rho, res1, iters, report = nested_solve(inner, outer, interval, cfg)
    res2 = outer(sigma, rho)
    if abs(res2) > cfg.price_tol:
        raise NoRoot(f"refined root leaves residual {res2!r} above price_tol")
    return ImpliedPair(sigma, rho, (res1, res2), iters, report)


def implied_pair_normalized(g1: float, g2: float, kappa1: float, kappa2: float, tau: float,
                            cfg: Optional[SolverConfig] = None,
                            kinds: tuple = (OptionKind.CALL, OptionKind.CALL)) -> ImpliedPair:
    """Same system with spot-normalized prices ``G_i = P_i / S`` and moneyness ``kappa_i = K_i / S``."""
    q1 = OptionQuote(kinds[0], kappa1, tau, g1)
    q2 = OptionQuote(kinds[1], kappa2, tau, g2)
    return implied_pair(q1, q2, 1.0, cfg)


def term_structure_triple(q1: OptionQuote, q2: OptionQuote, q3: OptionQuote, spot: float,
                          cfg: Optional[SolverConfig] = None) -> TermStructureFit:
    """Three quotes, ``q1`` short-dated and ``q2``, ``q3`` sharing a longer expiry.

    A single constant annualized rate discounts both horizons. ``(sigma2, rho)``
    come from the long-dated pair, then ``sigma1`` from ``q1`` at that rate.
    """
    cfg = cfg or SolverConfig()
    if not q1.tau < q2.tau:
        raise ValueError(f"q1 must expire first, got {q1.tau} >= {q2.tau}")
    pair = implied_pair(q2, q3, spot, cfg)
    try:
        sigma1, res1, _ = _conditional_vol(q1, spot, pair.rho_imp, cfg)
    except (PriceOutOfBounds, BracketExhausted, InnerFailure) as exc:
        raise InnerFailure(f"short-dated quote unsolvable at rho={pair.rho_imp!r}: {exc}") from exc
    return TermStructureFit(sigma1, pair.sigma_imp, pair.rho_imp,
                            (res1,) + tuple(pair.residuals), pair)


__all__ = [
    "OptionQuote", "SolverConfig", "RhoInterval", "BracketReport", "ImpliedPair",
    "TermStructureFit", "check_arbitrage_box", "implied_vol_given_rho", "implied_pair",
    "implied_pair_normalized", "term_structure_triple", "nested_solve", "CalibrationError",
]
