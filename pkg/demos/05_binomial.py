"""
The binomial analogue
=====================

A recombining lattice with per-period gross rate rho and moves (1 - eps) and
1 / (1 - eps). Two lattice prices determine (eps, rho) when enough nodes lie
between the strikes; with both strikes in one node interval there can be
several exact solutions.
"""
from impliedpair import BinomialModel, MultipleRoots, binomial_price, implied_rho_eps
from impliedpair.binomial import perturbed_price

# one period, eps = 0.5, no interest: the call is worth 1/3
print(binomial_price(BinomialModel(1.0, 0.5, 1), "call", 1.0))

# round trip on a fine lattice
m = BinomialModel(1.001, 0.03, 100)
p1, p2 = binomial_price(m, "call", 0.9), binomial_price(m, "call", 1.15)
res = implied_rho_eps(p1, p2, 0.9, 1.15, 1.0, 100)
print("recovered eps, rho:", res.sigma_imp, res.rho_imp)

# a coarse lattice: K = 0.9 and 1.1 share a node interval at N = 10
coarse = BinomialModel(1.02, 0.3, 10)
try:
    implied_rho_eps(binomial_price(coarse, "call", 0.9), binomial_price(coarse, "call", 1.1),
                    0.9, 1.1, 1.0, 10)
except MultipleRoots as exc:
    print("several exact (eps, rho):", exc.roots)

# prices from the continuous perturbed walk, read back through the lattice
gen = BinomialModel(1.01, 0.1, 10)
q1 = perturbed_price(gen, "call", 0.9, 100_000, seed=7)
q2 = perturbed_price(gen, "call", 1.1, 100_000, seed=7)
fit = implied_rho_eps(q1, q2, 0.9, 1.1, 1.0, 10)
print("perturbed generator -> eps, rho:", fit.sigma_imp, fit.rho_imp)
