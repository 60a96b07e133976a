"""Randomized rank-1 lattice rules for approximation in weighted Korobov spaces."""

from .approx import (Approximant, alias_expansion, approximate, estimate_coeffs,
                     exact_expected_sq_error_given_rule, exact_sq_error_fixed,
                     rmse_monte_carlo, sample_function)
from .cbc import (CbcConfig, CbcResult, candidate_scores, criterion_direct, criterion_formula,
                  randomized_cbc, select_candidate_set)
from .indexset import IndexSet, build_index_set, cardinality, corollary_T
from .korobov import decay_sum, korobov_norm_sq, r_alpha_gamma
from .lattice import LatticeRule, ShiftedLatticeRule, character_sum, dual_contains, primes_in_range
from .testfns import FourierPolynomial, KernelFunction, fooling_function, kernel_truncation

__version__ = "0.1.0"
