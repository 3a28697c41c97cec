"""
Black-Scholes with an averaged rate
===================================

The pricing kernel takes the time-averaged rate ``rho`` in place of a spot
rate. Here we price a few calls, check parity, and look at the degenerate
limits.
"""
import math

import numpy as np

from impliedpair import BsInputs, bs_price, vega

# an at-the-money call, one year, 20% vol, 5% average rate
inp = BsInputs(spot=1.0, strike=1.0, tau=1.0, sigma=0.2, rho=0.05)
call, put = bs_price("call", inp), bs_price("put", inp)
print(f"call {call:.12f}  put {put:.12f}  vega {vega(inp):.6f}")

# parity: C - P = S - K exp(-rho tau)
print("parity gap", call - put - (1.0 - math.exp(-0.05)))

# price along strikes: monotone decreasing and convex
strikes = np.linspace(0.6, 1.6, 11)
prices = [bs_price("call", BsInputs(1.0, k, 1.0, 0.2, 0.05)) for k in strikes]
for k, p in zip(strikes, prices):
    print(f"K={k:.1f}  C={p:.6f}")

# zero vol gives the discounted forward payoff; zero time gives intrinsic value
print(bs_price("call", BsInputs(1.0, 0.9, 1.0, 0.0, 0.05)), 1.0 - 0.9 * math.exp(-0.05))
print(bs_price("call", BsInputs(1.0, 0.9, 0.0, 0.2, 0.05)))
