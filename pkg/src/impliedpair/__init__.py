"""Joint implied volatility and implied average forward rate from pairs of option prices."""
from .binomial import (BinomialModel, binomial_price, implied_rho_eps, perturbed_price,
                       perturbed_sample_paths, risk_neutral_prob)
from .bs_core import BsInputs, OptionKind, bs_price, d_pair, norm_cdf, normalized_price, vega
from .calibrate import (ImpliedPair, OptionQuote, RhoInterval, SolverConfig, TermStructureFit,
                        check_arbitrage_box, implied_pair, implied_pair_normalized,
                        implied_vol_given_rho, term_structure_triple)
from .errors import (BracketExhausted, CalibrationError, DegenerateInputs, IdenticalStrikes,
                     InnerFailure, MultipleRoots, NoRoot, PriceOutOfBounds)
from .mc_verify import (McEstimate, PathSpec, averaged_params, lemma1_check,
                        mc_discounted_payoff)
from .mixture import PRESETS, MixtureModel, MixtureState, mixture_price, quote_pair
from .surface import SurfaceGrid, implied_surface, smile_slice

__version__ = "0.1.0"
