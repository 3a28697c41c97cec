import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from impliedpair.bs_core import BsInputs, OptionKind, _price, bs_price, discount_bounds
from impliedpair.calibrate import (OptionQuote, RhoInterval, SolverConfig, check_arbitrage_box,
                                   implied_pair, implied_pair_normalized, implied_vol_given_rho,
                                   nested_solve, term_structure_triple)
from impliedpair.errors import (BracketExhausted, IdenticalStrikes, InnerFailure, MultipleRoots,
                                NoRoot, PriceOutOfBounds)
from impliedpair.mixture import PRESETS, MixtureModel, mixture_price, quote_pair
from impliedpair.surface import smile_slice

CALL, PUT = OptionKind.CALL, OptionKind.PUT
MIX = PRESETS["paper-text"]

# bisection on the quadrature price (oracle) at rho = 0.09, two-state mixture K = 1
IV_MIX_K1_RHO009 = 0.500954965232306
# nested grid refinement (oracle)
PAIR_MIX_08_128 = (0.48582338210869863, 0.10869825030633933)
PAIR_MIX_NORM_10_14 = (0.5194991080249278, 0.07407478256175122)
TRIPLE_PAPER = (0.48668246599676634, 0.4845201499111198, 0.10600198977796266)


def quote(kind, k, tau, sigma, rho, spot=1.0):
    return OptionQuote(kind, k, tau, bs_price(kind, BsInputs(spot, k, tau, sigma, rho)))


class TestConditionalVol:
    def test_round_trip(self):
        q = quote(CALL, 1.0, 1.0, 0.3, 0.05)
        assert implied_vol_given_rho(q, 1.0, 0.05) == pytest.approx(0.3, abs=1e-8)

    def test_put_round_trip(self):
        q = quote(PUT, 1.2, 0.5, 0.45, -0.02)
        assert implied_vol_given_rho(q, 1.0, -0.02) == pytest.approx(0.45, abs=1e-10)

    def test_at_bound_rejected(self):
        p = 1 - 0.9 * math.exp(-0.05) + 1e-15
        with pytest.raises(PriceOutOfBounds):
            implied_vol_given_rho(OptionQuote(CALL, 0.9, 1.0, p), 1.0, 0.05)
        with pytest.raises(PriceOutOfBounds):
            implied_vol_given_rho(OptionQuote(CALL, 0.9, 1.0, 1.0), 1.0, 0.05)

    def test_bracket_exhausted(self):
        q = quote(CALL, 1.0, 1.0, 3.0, 0.05)
        with pytest.raises(BracketExhausted):
            implied_vol_given_rho(q, 1.0, 0.05, SolverConfig(sigma_bracket=(0.01, 2.0)))

    def test_mixture_against_bisection(self):
        q = OptionQuote(CALL, 1.0, 1.0, mixture_price(MIX, CALL, 1.0))
        sigma = implied_vol_given_rho(q, 1.0, 0.09)
        assert 0.3 < sigma < 0.7
        assert sigma == pytest.approx(IV_MIX_K1_RHO009, abs=1e-12)

    def test_decreasing_in_rho(self):
        q = OptionQuote(CALL, 1.0, 1.0, mixture_price(MIX, CALL, 1.0))
        rhos = np.arange(-0.1, 0.2, 1e-3)
        sig = [implied_vol_given_rho(q, 1.0, r) for r in rhos]
        assert all(b < a for a, b in zip(sig, sig[1:]))


class TestArbitrageBox:
    def test_call_above_spot_is_empty(self):
        assert check_arbitrage_box(OptionQuote(CALL, 1.0, 1.0, 1.0), 1.0, (-1, 2)).empty
        assert check_arbitrage_box(OptionQuote(CALL, 1.0, 1.0, 1.5), 1.0, (-1, 2)).empty

    def test_call_at_intrinsic(self):
        rho_star = 0.05
        p = 1 - 0.9 * math.exp(-rho_star)
        box = check_arbitrage_box(OptionQuote(CALL, 0.9, 1.0, p), 1.0, (-1, 2))
        assert box.hi == pytest.approx(rho_star, abs=1e-14) and box.hi_open
        assert rho_star not in box and 0.5 not in box and 0.0 in box

    def test_mixture_quote_matches_dense_scan(self):
        q = OptionQuote(CALL, 1.28, 1.0, mixture_price(MIX, CALL, 1.28))
        box = check_arbitrage_box(q, 1.0, (-1, 2))
        grid = np.linspace(-1, 2, 300001)
        inside = [lo < q.price < hi for lo, hi in
                  (discount_bounds(CALL, 1.0, 1.28, 1.0, r) for r in grid)]
        admitted = grid[np.array(inside)]
        assert admitted.min() == box.lo
        assert box.hi - 1e-5 <= admitted.max() < box.hi
        assert all((r in box) == ok for r, ok in zip(grid[::997], inside[::997]))

    def test_put_interval_two_sided(self):
        q = quote(PUT, 1.0, 1.0, 0.2, 0.03)
        box = check_arbitrage_box(q, 1.0, (-1, 5))
        assert box.lo_open and box.hi_open and box.lo < 0.03 < box.hi

    def test_empty_interval(self):
        assert RhoInterval(1.0, 0.0).empty
        assert RhoInterval(0.5, 0.5, hi_open=True).empty
        assert not RhoInterval(0.5, 0.5).empty


class TestImpliedPair:
    def test_constant_round_trip(self):
        q1, q2 = quote(CALL, 0.9, 1, 0.3, 0.05), quote(CALL, 1.1, 1, 0.3, 0.05)
        res = implied_pair(q1, q2, 1.0)
        assert res.status == "converged"
        assert res.sigma_imp == pytest.approx(0.3, abs=1e-6)
        assert res.rho_imp == pytest.approx(0.05, abs=1e-6)
        assert res.bracket_report.roots == [res.rho_imp]

    def test_mixture_against_grid_oracle(self):
        res = implied_pair(*quote_pair(MIX, CALL, 0.8, 1.28), 1.0)
        assert 0.3 < res.sigma_imp < 0.7
        assert res.sigma_imp == pytest.approx(PAIR_MIX_08_128[0], abs=1e-10)
        assert res.rho_imp == pytest.approx(PAIR_MIX_08_128[1], abs=1e-10)

    def test_identical_strikes(self):
        q = quote(CALL, 1.0, 1, 0.3, 0.05)
        with pytest.raises(IdenticalStrikes):
            implied_pair(q, q, 1.0)

    def test_expiries_must_match(self):
        with pytest.raises(ValueError):
            implied_pair(quote(CALL, 0.9, 1, 0.3, 0.05), quote(CALL, 1.1, 2, 0.3, 0.05), 1.0)

    def test_call_and_put(self):
        res = implied_pair(quote(CALL, 0.95, 0.75, 0.35, 0.02), quote(PUT, 1.15, 0.75, 0.35, 0.02), 1.0)
        assert res.sigma_imp == pytest.approx(0.35, abs=1e-8)
        assert res.rho_imp == pytest.approx(0.02, abs=1e-8)

    def test_inconsistent_quotes_no_root(self):
        # the higher strike priced above the lower one: no Black-Scholes pair fits
        q1 = OptionQuote(CALL, 0.9, 1.0, 0.15)
        q2 = OptionQuote(CALL, 1.1, 1.0, 0.16)
        with pytest.raises(NoRoot):
            implied_pair(q1, q2, 1.0)

    def test_first_quote_unusable(self):
        with pytest.raises(InnerFailure):
            implied_pair(OptionQuote(CALL, 0.9, 1.0, 1.2), quote(CALL, 1.1, 1, 0.3, 0.05), 1.0)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 2.0), st.floats(-0.2, 0.5), st.floats(0.1, 3.0),
           st.floats(0.0, 1.0), st.floats(-0.25, 0.25))
    def test_round_trip_property(self, sigma, rho, tau, spread, shift):
        sd = sigma * math.sqrt(tau)
        half = max(0.5 * math.log(1.1) + 1e-3, 0.5 * sd) * (1 + 0.5 * spread)
        fwd_log = rho * tau + shift * sd
        k1, k2 = math.exp(fwd_log - half), math.exp(fwd_log + half)
        res = implied_pair(quote(CALL, k1, tau, sigma, rho), quote(CALL, k2, tau, sigma, rho), 1.0)
        assert res.sigma_imp == pytest.approx(sigma, abs=1e-6)
        assert res.rho_imp == pytest.approx(rho, abs=1e-6)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.7, 1.2), st.floats(0.05, 0.4), st.sampled_from(list(PRESETS)))
    def test_residual_guarantee(self, k1, gap, preset):
        m = PRESETS[preset]
        q1, q2 = quote_pair(m, CALL, k1, k1 + gap)
        cfg = SolverConfig()
        res = implied_pair(q1, q2, m.spot, cfg)
        for q in (q1, q2):
            repriced = _price(True, m.spot, q.strike, q.tau, res.sigma_imp, res.rho_imp)
            assert abs(repriced - q.price) <= cfg.price_tol


class TestNormalized:
    def test_round_trip(self):
        g1 = bs_price(CALL, BsInputs(1, 0.9, 1, 0.4, 0.03))
        g2 = bs_price(CALL, BsInputs(1, 1.1, 1, 0.4, 0.03))
        res = implied_pair_normalized(g1, g2, 0.9, 1.1, 1.0)
        assert res.sigma_imp == pytest.approx(0.4, abs=1e-6)
        assert res.rho_imp == pytest.approx(0.03, abs=1e-6)

    def test_equivalence_at_spot(self):
        s = 3.7
        q1, q2 = quote(CALL, 0.9 * s, 1, 0.4, 0.03, s), quote(CALL, 1.1 * s, 1, 0.4, 0.03, s)
        a = implied_pair(q1, q2, s)
        b = implied_pair_normalized(q1.price / s, q2.price / s, 0.9, 1.1, 1.0)
        assert a.sigma_imp == pytest.approx(b.sigma_imp, abs=1e-9)
        assert a.rho_imp == pytest.approx(b.rho_imp, abs=1e-9)

    def test_mixture_against_grid_oracle(self):
        g1, g2 = mixture_price(MIX, CALL, 1.0), mixture_price(MIX, CALL, 1.4)
        res = implied_pair_normalized(g1, g2, 1.0, 1.4, 1.0)
        assert res.sigma_imp == pytest.approx(PAIR_MIX_NORM_10_14[0], abs=1e-10)
        assert res.rho_imp == pytest.approx(PAIR_MIX_NORM_10_14[1], abs=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.1, 100.0), st.floats(0.75, 1.05), st.floats(0.1, 0.3))
    def test_homogeneity_equivalence(self, s, k1, gap):
        m = PRESETS["paper-figure"]
        p1, p2 = mixture_price(m, CALL, k1), mixture_price(m, CALL, k1 + gap)
        a = implied_pair(OptionQuote(CALL, k1 * s, 1.0, p1 * s), OptionQuote(CALL, (k1 + gap) * s, 1.0, p2 * s), s)
        b = implied_pair_normalized(p1, p2, k1, k1 + gap, 1.0)
        assert a.sigma_imp == pytest.approx(b.sigma_imp, abs=1e-9)
        assert a.rho_imp == pytest.approx(b.rho_imp, abs=1e-9)


class TestTermStructure:
    def test_constant(self):
        fit = term_structure_triple(quote(CALL, 1.0, 0.5, 0.25, 0.04), quote(CALL, 0.9, 1, 0.25, 0.04),
                                    quote(CALL, 1.1, 1, 0.25, 0.04), 1.0)
        s1, s2, rho = fit
        assert (s1, s2, rho) == pytest.approx((0.25, 0.25, 0.04), abs=1e-6)

    def test_two_volatilities(self):
        fit = term_structure_triple(quote(CALL, 1.0, 0.5, 0.2, 0.05), quote(CALL, 0.9, 1, 0.35, 0.05),
                                    quote(CALL, 1.1, 1, 0.35, 0.05), 1.0)
        assert tuple(fit) == pytest.approx((0.2, 0.35, 0.05), abs=1e-6)
        assert max(abs(r) for r in fit.residuals) <= 1e-10

    def test_mixture_against_grid_oracle(self):
        short = MixtureModel.two_point(0.5, (0.3, 0.7), (0.1, 0.08), 1.0, 0.5)
        q1 = OptionQuote(CALL, 1.0, 0.5, mixture_price(short, CALL, 1.0))
        q2, q3 = quote_pair(MIX, CALL, 0.9, 1.2)
        assert tuple(term_structure_triple(q1, q2, q3, 1.0)) == pytest.approx(TRIPLE_PAPER, abs=1e-10)

    def test_expiry_order(self):
        with pytest.raises(ValueError):
            term_structure_triple(quote(CALL, 1.0, 1.0, 0.2, 0.05), quote(CALL, 0.9, 1, 0.35, 0.05),
                                  quote(CALL, 1.1, 1, 0.35, 0.05), 1.0)

    def test_short_quote_unsolvable(self):
        with pytest.raises(InnerFailure):
            term_structure_triple(OptionQuote(CALL, 1.0, 0.5, 1.0 - 1e-13), quote(CALL, 0.9, 1, 0.35, 0.05),
                                  quote(CALL, 1.1, 1, 0.35, 0.05), 1.0)


def test_multiple_roots_reported():
    # outer function with two sign changes; both roots must be surfaced
    def inner(y):
        return 0.3, 0.0, 1

    def outer(x, y):
        return (y - 0.1) * (y - 0.6)

    with pytest.raises(MultipleRoots) as info:
        nested_solve(inner, outer, RhoInterval(-1.0, 2.0), SolverConfig())
    roots = sorted(r for _, r in info.value.roots)
    assert roots == pytest.approx([0.1, 0.6], abs=1e-12)


def test_smile_exists_for_presets():
    for preset in PRESETS.values():
        for k2 in (1.28, 1.4):
            pts = smile_slice(preset, np.round(np.arange(0.7, 1.2501, 0.05), 6), k2)
            sig = [p.sigma_imp for p in pts if p.converged]
            assert max(sig) - min(sig) > 1e-3
