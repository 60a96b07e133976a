import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randlattice import cbc
from randlattice.lattice import LatticeRule, primes_in_range


@pytest.mark.parametrize("N,z,alpha,g", [(5, (1,), 1, (1.0,)), (7, (1, 3), 1, (1.0, 0.5)),
                                         (11, (1, 4, 5), 2, (0.9, 0.6, 0.3)), (13, (1, 5), 3, (1.0, 1.0))])
def test_formula_matches_direct(N, z, alpha, g):
    rule = LatticeRule(N, z)
    direct = cbc.criterion_direct(rule, alpha, g, 1000)
    assert abs(cbc.criterion_formula_sq(rule, alpha, g) - direct.value_sq) <= 1e-6 + direct.tail_sq
    assert isinstance(direct.value_sq, float) and isinstance(direct.tail_sq, float)


def test_direct_matches_naive_enumeration():
    rule = LatticeRule(5, (1, 2))
    fast = cbc.criterion_direct(rule, 1, (1.0, 0.5), 6)
    naive = cbc.criterion_direct_naive(rule, 1, (1.0, 0.5), 6)
    assert fast.value_sq == pytest.approx(naive, rel=1e-12)


def test_non_integer_alpha_series_route():
    rule = LatticeRule(7, (1, 3))
    direct = cbc.criterion_direct(rule, 1.5, (1.0, 0.5), 2000)
    formula = cbc.criterion_formula_sq(rule, 1.5, (1.0, 0.5), series_terms=20000)
    assert abs(formula - direct.value_sq) <= 1e-6 + direct.tail_sq


def test_zero_weights_give_zero():
    assert cbc.criterion_formula(LatticeRule(7, (1, 2)), 1, (0.0, 0.0)) == 0.0


@pytest.mark.parametrize("N", [7, 31, 127, 1009])
@pytest.mark.parametrize("alpha", [1, 2])
def test_fast_matches_naive(N, alpha):
    g = (0.9, 0.5, 0.3)
    fast = cbc.candidate_scores(N, [1, 3], alpha, g, fast=True)
    slow = cbc.candidate_scores(N, [1, 3], alpha, g, fast=False)
    assert np.max(np.abs(fast - slow) / slow) <= 1e-9


def test_scores_match_formula():
    N, g = 31, (1.0, 0.5)
    sc = cbc.candidate_scores(N, [1], 1, g)
    for z2 in (1, 7, 30):
        assert sc[z2 - 1] == pytest.approx(cbc.criterion_formula(LatticeRule(N, (1, z2)), 1, g), rel=1e-12)


def test_fast_needs_prime():
    with pytest.raises(ValueError):
        cbc.candidate_scores(15, [1], 1, (1.0, 1.0))
    assert cbc.candidate_scores(15, [1], 1, (1.0, 1.0), fast=False).shape == (14,)


def test_primitive_root():
    for N in (3, 7, 31, 1009):
        g = cbc.primitive_root(N)
        assert len({pow(g, k, N) for k in range(N - 1)}) == N - 1


def test_candidate_set_size():
    assert cbc.candidate_set_size(7, 0.5) == 3
    assert cbc.candidate_set_size(11, 0.3) == 3
    assert cbc.candidate_set_size(11, 0.01) == 1
    assert cbc.candidate_set_size(101, 0.9) == 90


def test_select_breaks_ties_by_value():
    scores = np.array([2.0, 1.0, 1.0, 3.0, 1.0, 2.0])
    assert cbc.select_candidate_set(scores, 0.5).tolist() == [2, 3, 5]
    assert cbc.select_candidate_set(scores, 0.7).tolist() == [2, 3, 5, 1, 6]


def test_config_validation():
    with pytest.raises(ValueError):
        cbc.CbcConfig(10, 2, 1, (1, 1), 1.5, 0)
    with pytest.raises(ValueError):
        cbc.CbcConfig(10, 2, 1, (1, 1), 0.5, -1)
    with pytest.raises(ValueError):
        cbc.CbcConfig(3, 2, 1, (1, 1), 0.5, 0)
    with pytest.raises(ValueError):
        cbc.CbcConfig(10, 2, 0.4, (1, 1), 0.5, 0)


@settings(max_examples=40)
@given(st.integers(10, 300), st.integers(1, 4), st.sampled_from([0.25, 0.5, 0.9]), st.integers(0, 2**32))
def test_construction_contract(M, d, tau, seed):
    cfg = cbc.CbcConfig(M, d, 1, (1.0, 0.7, 0.5, 0.3)[:d], tau, seed)
    res = cbc.randomized_cbc(cfg)
    N, z = res.rule.n_points, res.rule.gen
    assert N in primes_in_range(M)
    assert z[0] == 1 and len(z) == d
    for s in range(2, d + 1):
        assert z[s - 1] in res.candidate_sets[s - 1]
        assert res.candidate_set_sizes[s - 1] == cbc.candidate_set_size(N, tau)
        assert res.per_step_scores[s - 1] == pytest.approx(
            cbc.criterion_formula(LatticeRule(N, z[:s]), 1, cfg.gamma[:s]), rel=1e-10)
    assert res.to_json() == cbc.randomized_cbc(cfg).to_json()


def test_pool_coverage():
    # every prime in the pool is reachable
    seen = {cbc.randomized_cbc(cbc.CbcConfig(20, 1, 1, (1.0,), 0.5, s)).rule.n_points for s in range(200)}
    assert seen == set(primes_in_range(20))


def test_m10_example():
    res = cbc.randomized_cbc(cbc.CbcConfig(10, 2, 1, (1.0, 0.5), 0.5, 42))
    assert res.rule.n_points == 7
    d = res.to_dict()
    assert set(d) == {"N", "z", "scores", "seed", "tau", "candidate_set_sizes"}
