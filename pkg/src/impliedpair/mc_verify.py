"""
Monte Carlo check that deterministic time-varying volatility and rate curves
price like Black-Scholes at the time-averaged variance and rate.

Simulation runs under the pricing measure, so the drift is the short rate;
the physical appreciation rate never enters.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .bs_core import BsInputs, OptionKind, bs_price

_BLOCK = 1 << 16


@dataclass(frozen=True)
class PathSpec:
    """Piecewise-constant sigma(s) and r(s) on ``[0, tau]``.

    ``breakpoints`` has one more entry than the segment arrays and starts at 0.
    A zero sigma is allowed and gives a deterministic path. Specs built from
    segment lengths keep those lengths verbatim, so reordering segments leaves
    every per-segment product, and hence the averaged parameters, bit-identical.
    """

    breakpoints: tuple[float, ...]
    sigma_segments: tuple[float, ...]
    rate_segments: tuple[float, ...]
    spot: float = 1.0
    segment_lengths: Optional[tuple[float, ...]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("breakpoints", "sigma_segments", "rate_segments"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        b = self.breakpoints
        if len(b) < 2 or b[0] != 0.0:
            raise ValueError("breakpoints must start at 0 and contain at least two times")
        if any(t1 <= t0 for t0, t1 in zip(b, b[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not len(self.sigma_segments) == len(self.rate_segments) == len(b) - 1:
            raise ValueError("segment counts do not match the breakpoints")
        if any(not s >= 0 for s in self.sigma_segments):
            raise ValueError("segment volatilities must be non-negative")
        if any(math.isnan(r) for r in self.rate_segments):
            raise ValueError("segment rate is NaN")
        if not self.spot > 0:
            raise ValueError(f"spot must be positive, got {self.spot}")
        if self.segment_lengths is None:
            object.__setattr__(self, "segment_lengths", tuple(float(d) for d in np.diff(b)))
        elif len(self.segment_lengths) != len(b) - 1:
            raise ValueError("segment_lengths does not match the breakpoints")

    @property
    def tau(self) -> float:
        return math.fsum(self.segment_lengths)

    @property
    def durations(self) -> np.ndarray:
        return np.asarray(self.segment_lengths)

    @classmethod
    def from_segments(cls, spot: float, segments: Sequence[tuple[float, float, float]]) -> "PathSpec":
        """Build from ``(dt, sigma, r)`` triples."""
        dts = tuple(float(dt) for dt, _, _ in segments)
        for dt in dts:
            if not dt > 0:
                raise ValueError(f"segment length must be positive, got {dt}")
        times = tuple(math.fsum(dts[:i]) for i in range(len(dts) + 1))
        return cls(times, tuple(s for _, s, _ in segments),
                   tuple(r for _, _, r in segments), spot, dts)

    @classmethod
    def from_dict(cls, doc: dict) -> "PathSpec":
        try:
            segs = [(float(s["dt"]), float(s["sigma"]), float(s["r"])) for s in doc["segments"]]
            return cls.from_segments(float(doc["spot"]), segs)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed path spec: {exc!r}") from exc

    def to_dict(self) -> dict:
        return {"spot": self.spot,
                "segments": [{"dt": float(dt), "sigma": s, "r": r} for dt, s, r in
                             zip(self.durations, self.sigma_segments, self.rate_segments)]}

    def permuted(self, order: Sequence[int]) -> "PathSpec":
        segs = list(zip(self.durations, self.sigma_segments, self.rate_segments))
        return PathSpec.from_segments(self.spot, [segs[i] for i in order])


def load_spec(source: Union[str, Path, dict]) -> PathSpec:
    if isinstance(source, dict):
        return PathSpec.from_dict(source)
    with open(source) as fh:
        return PathSpec.from_dict(json.load(fh))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int
    seed: int


@dataclass(frozen=True)
class Lemma1Report:
    mc: McEstimate
    analytic: float
    z_score: float

    def to_dict(self) -> dict:
        return {"mc_mean": self.mc.mean, "std_error": self.mc.std_error,
                "analytic": self.analytic, "z_score": self.z_score,
                "n_paths": self.mc.n_paths, "seed": self.mc.seed}


def averaged_params(spec: PathSpec) -> tuple[float, float]:
    """Time-averaged variance and rate, exact for piecewise-constant curves."""
    dt = spec.durations
    v = math.fsum(s * s * d for s, d in zip(spec.sigma_segments, dt)) / spec.tau
    rho = math.fsum(r * d for r, d in zip(spec.rate_segments, dt)) / spec.tau
    return v, rho


def mc_discounted_payoff(spec: PathSpec, kind: Union[OptionKind, str], strike: float,
                         n_paths: int, seed: int, antithetic: bool = False) -> McEstimate:
    """Sample ``exp(-int r) F(S(T))`` with exact lognormal steps per segment.

    With ``antithetic`` the normals are used in ``(z, -z)`` pairs and the
    standard error is computed from the pair averages; ``n_paths`` then counts
    individual payoffs and must be even.
    """
    if n_paths < 100:
        raise ValueError("n_paths must be >= 100")
    if antithetic and n_paths % 2:
        raise ValueError("antithetic sampling needs an even n_paths")
    kind = OptionKind.parse(kind)
    dt = spec.durations
    sig = np.asarray(spec.sigma_segments)
    r = np.asarray(spec.rate_segments)
    drift = math.fsum((r - 0.5 * sig ** 2) * dt)
    scale = sig * np.sqrt(dt)
    discount = math.exp(-math.fsum(r * dt))

    def payoff(log_s):
        s = spec.spot * np.exp(log_s)
        if kind is OptionKind.CALL:
            return discount * np.maximum(s - strike, 0.0)
        return discount * np.maximum(strike - s, 0.0)

    n_draws = n_paths // 2 if antithetic else n_paths
    n_blocks = -(-n_draws // _BLOCK)
    count, mean, m2 = 0, 0.0, 0.0
    for b, child in enumerate(np.random.SeedSequence(seed).spawn(n_blocks)):
        size = min(_BLOCK, n_draws - b * _BLOCK)
        z = np.random.default_rng(child).standard_normal((size, len(dt)))
        shock = z @ scale
        x = payoff(drift + shock)
        if antithetic:
            x = 0.5 * (x + payoff(drift - shock))
        # centered per-block moments, merged pairwise (Chan et al.)
        if x.min() == x.max():
            mean_b, m2_b = float(x[0]), 0.0
        else:
            mean_b = float(x.mean())
            m2_b = float(np.dot(x - mean_b, x - mean_b))
        if count == 0:
            count, mean, m2 = size, mean_b, m2_b
            continue
        delta = mean_b - mean
        total = count + size
        mean += delta * size / total
        m2 += m2_b + delta * delta * count * size / total
        count = total
    var = m2 / (n_draws - 1)
    return McEstimate(mean, math.sqrt(var / n_draws), n_paths, seed)


def lemma1_check(spec: PathSpec, kind: Union[OptionKind, str], strike: float, n_paths: int,
                 seed: int, antithetic: bool = False) -> Lemma1Report:
    """Compare the simulated price with Black-Scholes at ``(sqrt(v), rho)``."""
    v, rho = averaged_params(spec)
    analytic = bs_price(kind, BsInputs(spec.spot, strike, spec.tau, math.sqrt(v), rho))
    mc = mc_discounted_payoff(spec, kind, strike, n_paths, seed, antithetic)
    diff = mc.mean - analytic
    if mc.std_error > 0:
        z = diff / mc.std_error
    else:
        z = 0.0 if abs(diff) <= 1e-14 * max(1.0, abs(analytic)) else math.copysign(math.inf, diff)
    return Lemma1Report(mc, analytic, z)
