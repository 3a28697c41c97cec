"""
Discrete risk-neutral mixture over constant (sigma, r) states.

When volatility and rate are drawn once, independently of the Brownian
driver, the option price is the probability-weighted average of the
Black-Scholes prices of the individual states.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .bs_core import OptionKind, _price
from .calibrate import OptionQuote
from .errors import IdenticalStrikes


@dataclass(frozen=True)
class MixtureState:
    p: float
    sigma: float
    r: float

    def __post_init__(self):
        if not self.p >= 0:
            raise ValueError(f"state weight must be non-negative, got {self.p}")
        if not self.sigma > 0:
            raise ValueError(f"state sigma must be positive, got {self.sigma}")
        if math.isnan(self.r):
            raise ValueError("state rate is NaN")


@dataclass(frozen=True)
class MixtureModel:
    states: tuple[MixtureState, ...]
    spot: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise ValueError("a mixture needs at least one state")
        total = math.fsum(s.p for s in self.states)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"state weights sum to {total!r}, not 1")
        if not self.spot > 0:
            raise ValueError(f"spot must be positive, got {self.spot}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @classmethod
    def two_point(cls, p, sigmas, rates, spot=1.0, tau=1.0) -> "MixtureModel":
        return cls((MixtureState(p, sigmas[0], rates[0]),
                    MixtureState(1.0 - p, sigmas[1], rates[1])), spot, tau)

    @classmethod
    def single(cls, sigma, r, spot=1.0, tau=1.0) -> "MixtureModel":
        return cls((MixtureState(1.0, sigma, r),), spot, tau)

    @classmethod
    def from_dict(cls, doc: dict) -> "MixtureModel":
        try:
            states = tuple(MixtureState(float(s["p"]), float(s["sigma"]), float(s["r"]))
                           for s in doc["states"])
            return cls(states, float(doc["spot"]), float(doc["tau"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed mixture document: {exc!r}") from exc

    def to_dict(self) -> dict:
        return {"spot": self.spot, "tau": self.tau,
                "states": [{"p": s.p, "sigma": s.sigma, "r": s.r} for s in self.states]}


def load_model(source: Union[str, Path, dict]) -> MixtureModel:
    """Read a mixture from a JSON file (or an already parsed document)."""
    if isinstance(source, dict):
        return MixtureModel.from_dict(source)
    with open(source) as fh:
        return MixtureModel.from_dict(json.load(fh))


# Both parameter sets quoted for the two-point example; the rate of the
# low-volatility state differs between the text (0.1) and the figure (0.01).
PRESETS = {
    "paper-text": MixtureModel.two_point(0.5, (0.3, 0.7), (0.1, 0.08)),
    "paper-figure": MixtureModel.two_point(0.5, (0.3, 0.7), (0.01, 0.08)),
}


def mixture_price(model: MixtureModel, kind: Union[OptionKind, str], strike: float) -> float:
    """Weighted sum of per-state Black-Scholes prices at the model's spot and horizon."""
    kind = OptionKind.parse(kind)
    if not strike > 0:
        raise ValueError(f"strike must be positive, got {strike}")
    is_call = kind is OptionKind.CALL
    return math.fsum(s.p * _price(is_call, model.spot, strike, model.tau, s.sigma, s.r)
                     for s in model.states)


def quote_pair(model: MixtureModel, kind: Union[OptionKind, str], k1: float,
               k2: float) -> tuple[OptionQuote, OptionQuote]:
    if k1 == k2:
        raise IdenticalStrikes(f"strikes coincide at {k1}")
    kind = OptionKind.parse(kind)
    return (OptionQuote(kind, k1, model.tau, mixture_price(model, kind, k1)),
            OptionQuote(kind, k2, model.tau, mixture_price(model, kind, k2)))
