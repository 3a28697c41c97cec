"""
Recombining binomial lattice with per-period gross rate ``rho`` and moves
``{1 - eps, 1 / (1 - eps)}``, plus its perturbed continuous-price variant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq

from .bs_core import OptionKind
from .calibrate import ImpliedPair, RhoInterval, SolverConfig, nested_solve
from .errors import BracketExhausted, IdenticalStrikes, PriceOutOfBounds

MAX_PERIODS = 10_000
_BLOCK = 1 << 16
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class BinomialModel:
    rho: float
    eps: float
    periods: int
    spot: float = 1.0

    def __post_init__(self):
        if not self.rho >= 1:
            raise ValueError(f"rho must be >= 1, got {self.rho}")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if int(self.periods) != self.periods or self.periods < 1:
            raise ValueError(f"periods must be a positive integer, got {self.periods}")
        if self.periods > MAX_PERIODS:
            raise OverflowError(f"periods > {MAX_PERIODS} not supported")
        if not self.spot > 0:
            raise ValueError(f"spot must be positive, got {self.spot}")


def risk_neutral_prob(eps: float) -> float:
    """Up-move probability making the discounted price a martingale.

    Solves ``q / (1 - eps) + (1 - q)(1 - eps) = 1``.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return (1.0 - eps) / (2.0 - eps)


@lru_cache(maxsize=64)
def _log_comb(n):
    j = np.arange(n + 1)
    out = np.array([math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) for k in j])
    out.flags.writeable = False
    return out


def terminal_distribution(model: BinomialModel) -> tuple[np.ndarray, np.ndarray]:
    """Terminal prices and risk-neutral probabilities, indexed by the number of up-moves."""
    n, eps = model.periods, model.eps
    q = risk_neutral_prob(eps)
    j = np.arange(n + 1)
    logw = _log_comb(n) + j * math.log(q) + (n - j) * math.log1p(-q)
    prices = model.spot * model.rho ** n * np.exp((n - 2 * j) * math.log1p(-eps))
    return prices, np.exp(logw)


def _lattice_price(is_call, spot, rho, eps, n, strike):
    q = (1.0 - eps) / (2.0 - eps)
    j = np.arange(n + 1)
    logw = _log_comb(n) + j * math.log(q) + (n - j) * math.log1p(-q)
    # discounting folded in: rho^{-N} (S0 rho^N z - K)^+ = (S0 z - K rho^{-N})^+;
    # weight and node combined in logs since (1 - eps)^{-N} alone can overflow
    log_s = math.log(spot) + (n - 2 * j) * math.log1p(-eps)
    k_disc = strike * rho ** (-n)
    log_k = math.log(k_disc)
    itm = log_s > log_k if is_call else log_s < log_k
    ws = np.exp(logw[itm] + log_s[itm])
    wk = k_disc * np.exp(logw[itm])
    return float(np.sum(ws - wk)) if is_call else float(np.sum(wk - ws))


def binomial_price(model: BinomialModel, kind: Union[OptionKind, str], strike: float) -> float:
    """Replication value ``rho^{-N} E_q[F(S(N))]`` on the recombining lattice."""
    kind = OptionKind.parse(kind)
    if not strike > 0:
        raise ValueError(f"strike must be positive, got {strike}")
    return _lattice_price(kind is OptionKind.CALL, model.spot, model.rho, model.eps,
                          int(model.periods), strike)


def _rho_interval(kind, price, strike, spot, n, rho_box, margin):
    lo, hi = rho_box
    if kind is OptionKind.CALL:
        # (S0 - K rho^{-N})^+ < P < S0
        if not margin < price < spot - margin:
            return RhoInterval(1.0, 0.0)
        rho_star = (strike / (spot - price + margin)) ** (1.0 / n)
        if rho_star <= lo:
            return RhoInterval(1.0, 0.0)
        return RhoInterval(lo, rho_star, hi_open=True) if rho_star <= hi else RhoInterval(lo, hi)
    # (K rho^{-N} - S0)^+ < P < K rho^{-N}
    if not price > margin:
        return RhoInterval(1.0, 0.0)
    r_up = (strike / (price + margin)) ** (1.0 / n)
    r_down = (strike / (price - margin + spot)) ** (1.0 / n)
    new_lo, lo_open = (r_down, True) if r_down >= lo else (lo, False)
    new_hi, hi_open = (r_up, True) if r_up <= hi else (hi, False)
    out = RhoInterval(new_lo, new_hi, lo_open, hi_open)
    return RhoInterval(1.0, 0.0) if out.empty else out


def implied_eps_given_rho(price: float, strike: float, spot: float, periods: int, rho: float,
                          kind: Union[OptionKind, str] = OptionKind.CALL,
                          eps_bracket=(1e-6, 0.99), price_tol: float = 1e-10,
                          max_iter: int = 200) -> float:
    """Range parameter reproducing one lattice price at a fixed per-period rate."""
    return _eps_solve(OptionKind.parse(kind) is OptionKind.CALL, price, strike, spot,
                      periods, rho, eps_bracket, price_tol, max_iter)[0]


def _eps_solve(is_call, price, strike, spot, n, rho, eps_bracket, price_tol, max_iter):
    k_disc = strike * rho ** (-n)
    lower = max(spot - k_disc, 0.0) if is_call else max(k_disc - spot, 0.0)
    upper = spot if is_call else k_disc
    if not lower + price_tol < price < upper - price_tol:
        raise PriceOutOfBounds(f"price {price!r} outside lattice bounds at rho={rho!r}")

    def f(e):
        return _lattice_price(is_call, spot, rho, e, n, strike) - price

    lo, hi = eps_bracket
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0 or f_hi < 0:
        raise BracketExhausted(f"implied eps outside [{lo}, {hi}] at rho={rho!r}")
    if f_lo == 0 or f_hi == 0:
        e = lo if f_lo == 0 else hi
        return e, 0.0, 1
    e, res = brentq(f, lo, hi, xtol=1e-300, rtol=4 * _EPS, maxiter=max_iter,
                    full_output=True, disp=False)
    resid = f(e)
    if abs(resid) > price_tol:
        raise BracketExhausted(f"lattice price flat in eps near the root at rho={rho!r}")
    return e, resid, res.iterations


def implied_rho_eps(p1: float, p2: float, k1: float, k2: float, spot: float, periods: int,
                    cfg: Optional[SolverConfig] = None,
                    kinds=(OptionKind.CALL, OptionKind.CALL),
                    rho_box=(1.0, 1.5), eps_box=(1e-6, 0.99)) -> ImpliedPair:
    """Lattice analogue of the implied pair: ``eps`` plays volatility, ``rho`` the rate.

    The returned ImpliedPair stores ``eps`` in ``sigma_imp`` and the per-period
    gross rate in ``rho_imp``.
    """
    cfg = cfg or SolverConfig()
    kind1, kind2 = OptionKind.parse(kinds[0]), OptionKind.parse(kinds[1])
    if k1 == k2 and kind1 is kind2:
        raise IdenticalStrikes(f"strikes coincide at {k1}")
    n = int(periods)
    if n < 1 or n > MAX_PERIODS:
        raise ValueError(f"periods must lie in [1, {MAX_PERIODS}], got {periods}")
    is_call1, is_call2 = kind1 is OptionKind.CALL, kind2 is OptionKind.CALL
    interval = _rho_interval(kind1, p1, k1, spot, n, rho_box, cfg.price_tol)

    def inner(rho):
        return _eps_solve(is_call1, p1, k1, spot, n, rho, eps_box, cfg.price_tol, cfg.max_iter)

    def outer(eps, rho):
        return _lattice_price(is_call2, spot, rho, eps, n, k2) - p2

    eps, rho, res1, iters, report = nested_solve(inner, outer, interval, cfg)
    return ImpliedPair(eps, rho, (res1, outer(eps, rho)), iters, report)


def perturbed_sample_paths(model: BinomialModel, n_paths: int, seed: int,
                           p_up: Optional[float] = None) -> np.ndarray:
    """Terminal prices of the perturbed lattice ``S(t+1) = rho S(t) zeta xi``.

    ``zeta`` is up with probability ``p_up`` (risk-neutral ``q`` by default,
    pass a physical probability otherwise) and ``xi`` is uniform on
    ``[1 - eps, 1 / (1 - eps)]``; all draws are independent per path and step.
    Paths are generated in fixed blocks with one spawned seed each, so the
    output for a given ``(seed, path index)`` never depends on ``n_paths``.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    q = risk_neutral_prob(model.eps) if p_up is None else float(p_up)
    if not 0 <= q <= 1:
        raise ValueError(f"p_up must lie in [0, 1], got {p_up}")
    n, eps = int(model.periods), model.eps
    d, u = 1.0 - eps, 1.0 / (1.0 - eps)
    log_d, log_u = math.log(d), math.log(u)
    n_blocks = -(-n_paths // _BLOCK)
    out = np.empty(n_paths)
    for b, child in enumerate(np.random.SeedSequence(seed).spawn(n_blocks)):
        rng = np.random.default_rng(child)
        start = b * _BLOCK
        size = min(_BLOCK, n_paths - start)
        # one row of 2N uniforms per path keeps path i fixed whatever the block size
        u01 = rng.random((size, 2 * n))
        ups = u01[:, :n] < q
        xi = d + (u - d) * u01[:, n:]
        log_growth = np.where(ups, log_u, log_d).sum(axis=1) + np.log(xi).sum(axis=1)
        out[start:start + size] = model.spot * model.rho ** n * np.exp(log_growth)
    return out


def perturbed_price(model: BinomialModel, kind: Union[OptionKind, str], strike: float,
                    n_paths: int, seed: int) -> float:
    """Discounted sample-mean payoff under the perturbed generator."""
    kind = OptionKind.parse(kind)
    s = perturbed_sample_paths(model, n_paths, seed)
    pay = np.maximum(s - strike, 0.0) if kind is OptionKind.CALL else np.maximum(strike - s, 0.0)
    return float(pay.mean()) * model.rho ** (-model.periods)
