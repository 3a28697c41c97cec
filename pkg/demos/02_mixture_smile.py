"""
Smiles from a two-state mixture
===============================

Quotes generated by a 50/50 mixture of two Black-Scholes worlds, each with its
own volatility and rate, are fitted by a single (sigma, rho) pair per strike
pair. Sweeping the first strike at a fixed second strike traces a smile or skew.
"""
from impliedpair import PRESETS, smile_slice, surface

k1_axis = surface.parse_range("0.7:1.25:0.05")

# both presets; they differ only in the first state's rate
for name in sorted(PRESETS):
    model = PRESETS[name]
    for k2 in (1.28, 1.4):
        cells = smile_slice(model, k1_axis, k2)
        sig = [c.sigma_imp for c in cells]
        print(f"{name:13s} K2={k2:<5} sigma_imp range {min(sig):.4f} .. {max(sig):.4f}")
        for c in cells:
            print(f"    K1={c.k1:.2f}  sigma={c.sigma_imp:.6f}  rho={c.rho_imp:.6f}  {c.status}")

# a single-state model is flat by construction
flat = smile_slice(PRESETS["paper-text"].single(0.3, 0.05), k1_axis, 1.28)
print("flat model spread:", max(c.sigma_imp for c in flat) - min(c.sigma_imp for c in flat))
