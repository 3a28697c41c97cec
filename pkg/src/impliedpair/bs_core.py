"""
Closed-form Black-Scholes kernel.

The rate argument ``rho`` is the average of the short rate over the life of
the option, so the discount factor is ``exp(-rho * tau)``. All quantities are
dimensionless multiples of a numeraire.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DegenerateInputs

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class OptionKind(enum.Enum):
    CALL = "call"
    PUT = "put"

    @classmethod
    def parse(cls, value: "OptionKind | str") -> "OptionKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown option kind {value!r}; expected 'call' or 'put'") from None

    def payoff(self, s: float, strike: float) -> float:
        if self is OptionKind.CALL:
            return max(s - strike, 0.0)
        return max(strike - s, 0.0)


@dataclass(frozen=True)
class BsInputs:
    """Arguments of the Black-Scholes formula.

    Parameters
    ----------
    spot : float
        Current underlying price, > 0.
    strike : float
        Strike, > 0.
    tau : float
        Time to expiry in years, >= 0.
    sigma : float
        Volatility per sqrt(year), >= 0 (zero selects the deterministic branch).
    rho : float
        Average forward risk-free rate over ``[t, T]``; any real value.
    """

    spot: float
    strike: float
    tau: float
    sigma: float
    rho: float

    def __post_init__(self):
        for name in ("spot", "strike", "tau", "sigma", "rho"):
            if math.isnan(getattr(self, name)):
                raise ValueError(f"{name} is NaN")
        if not self.spot > 0:
            raise ValueError(f"spot must be positive, got {self.spot}")
        if not self.strike > 0:
            raise ValueError(f"strike must be positive, got {self.strike}")
        if self.tau < 0:
            raise ValueError(f"tau must be non-negative, got {self.tau}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")


def norm_cdf(z: float) -> float:
    """Standard normal distribution function, via the complementary error function."""
    if math.isnan(z):
        raise ValueError("norm_cdf of NaN")
    return 0.5 * math.erfc(-z / _SQRT2)


def norm_pdf(z: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def _d_pair(x, k, tau, sigma, rho):
    sd = sigma * math.sqrt(tau)
    d_plus = (math.log(x / k) + tau * rho) / sd + 0.5 * sd
    return d_plus, d_plus - sd


def d_pair(inputs: BsInputs) -> tuple[float, float]:
    """Return ``(d_plus, d_minus)``; raises DegenerateInputs when tau or sigma is zero."""
    if inputs.tau == 0 or inputs.sigma == 0:
        raise DegenerateInputs("d+/d- undefined for zero tau or zero sigma")
    return _d_pair(inputs.spot, inputs.strike, inputs.tau, inputs.sigma, inputs.rho)


def _call(x, k, tau, sigma, rho):
    # hot path for the solvers: no validation
    if tau == 0:
        return max(x - k, 0.0)
    df = math.exp(-rho * tau)
    if sigma == 0:
        return max(x - k * df, 0.0)
    d_plus, d_minus = _d_pair(x, k, tau, sigma, rho)
    c = x * norm_cdf(d_plus) - k * df * norm_cdf(d_minus)
    return c if c > 0.0 else 0.0


def _price(is_call, x, k, tau, sigma, rho):
    c = _call(x, k, tau, sigma, rho)
    if is_call:
        return c
    if tau == 0:
        return max(k - x, 0.0)
    p = c - x + k * math.exp(-rho * tau)
    return p if p > 0.0 else 0.0


def bs_price(kind: OptionKind | str, inputs: BsInputs, allow_degenerate: bool = True) -> float:
    """Black-Scholes price of a vanilla call or put.

    The put is obtained from the call through put-call parity. With ``tau == 0``
    the intrinsic value is returned; with ``sigma == 0`` (and ``tau > 0``) the
    deterministic-forward value is returned unless ``allow_degenerate`` is False.
    """
    kind = OptionKind.parse(kind)
    if inputs.sigma == 0 and inputs.tau > 0 and not allow_degenerate:
        raise DegenerateInputs("sigma == 0 with tau > 0 and the zero-volatility limit disallowed")
    return _price(kind is OptionKind.CALL, inputs.spot, inputs.strike, inputs.tau,
                  inputs.sigma, inputs.rho)


def _vega(x, k, tau, sigma, rho):
    d_plus, _ = _d_pair(x, k, tau, sigma, rho)
    return x * math.sqrt(tau) * norm_pdf(d_plus)


def vega(inputs: BsInputs) -> float:
    """dPrice/dSigma, identical for calls and puts."""
    if inputs.tau == 0 or inputs.sigma == 0:
        raise DegenerateInputs("vega undefined for zero tau or zero sigma")
    return _vega(inputs.spot, inputs.strike, inputs.tau, inputs.sigma, inputs.rho)


def normalized_price(kind: OptionKind | str, kappa: float, tau: float, sigma: float,
                     rho: float) -> float:
    """Price per unit of spot for strike ``kappa * spot`` (i.e. spot fixed at 1)."""
    return bs_price(kind, BsInputs(1.0, kappa, tau, sigma, rho))


def discount_bounds(kind: OptionKind | str, spot: float, strike: float, tau: float,
                    rho: float) -> tuple[float, float]:
    """Static no-arbitrage interval ``(lower, upper)`` of a European price."""
    kind = OptionKind.parse(kind)
    kdf = strike * math.exp(-rho * tau)
    if kind is OptionKind.CALL:
        return max(spot - kdf, 0.0), spot
    return max(kdf - spot, 0.0), kdf
