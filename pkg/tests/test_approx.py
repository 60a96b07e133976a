import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randlattice import approx
from randlattice.analysis import enumerated_expected_sq_error
from randlattice.cbc import CbcConfig
from randlattice.indexset import IndexSet, build_index_set
from randlattice.lattice import LatticeRule, ShiftedLatticeRule
from randlattice.testfns import FourierPolynomial, kernel_truncation, random_unit_norm_poly


def naive_estimates(samples, rule, H):
    X = lattice_pts(rule)
    return np.array([np.mean(samples * np.exp(-2j * np.pi * (X @ h))) for h in H])


def lattice_pts(rule):
    k = np.arange(rule.n_points)[:, None]
    return k * np.asarray(rule.gen)[None, :] / rule.n_points + np.asarray(rule.shift)


def random_rule(rng, d=2, Ns=(7, 11, 31, 61)):
    N = int(rng.choice(Ns))
    return ShiftedLatticeRule(LatticeRule(N, rng.integers(1, N, d)), rng.random(d))


def random_poly(rng, d=2, n=25, spread=40):
    return FourierPolynomial(rng.integers(-spread, spread + 1, (n, d)),
                             rng.standard_normal(n) + 1j * rng.standard_normal(n))


def test_sample_function_basics():
    rule = ShiftedLatticeRule(LatticeRule(7, (1, 3)), (0.0, 0.0))
    assert np.allclose(approx.sample_function(lambda X: np.ones(len(X)), rule), 1)
    h = np.array([2, -1])
    y = approx.sample_function(FourierPolynomial([h], [1.0]), rule)
    assert np.allclose(y[1:] / y[:-1], np.exp(2j * np.pi * (h @ (1, 3)) / 7))


@settings(max_examples=30)
@given(st.integers(0, 2**31))
def test_fft_matches_naive_sum(seed):
    rng = np.random.default_rng(seed)
    rule = random_rule(rng)
    f = random_poly(rng)
    A = build_index_set(2, 1, (1.0, 0.5), 30)
    y = approx.sample_function(f, rule)
    est = approx.estimate_coeffs(y, rule, A)
    assert np.max(np.abs(est.coeffs - naive_estimates(y, rule, A.members))) <= 1e-10


def test_single_mode_recovered():
    rule = ShiftedLatticeRule(LatticeRule(101, (1, 37)), (0.3, 0.8))
    A = build_index_set(2, 1, (1.0, 1.0), 4)
    h0 = np.array([1, 1])
    est = approx.estimate_coeffs(approx.sample_function(FourierPolynomial([h0], [1.0]), rule), rule, A)
    for h, c in zip(A.members, est.coeffs):
        assert abs(c - (1.0 if np.array_equal(h, h0) else 0.0)) <= 1e-10


def test_alias_to_bin_zero():
    N, shift = 11, (0.37, 0.21)
    rule = ShiftedLatticeRule(LatticeRule(N, (1, 4)), shift)
    A = IndexSet(2, 1.0, np.array([[0, 0]]))
    f = FourierPolynomial([(N, 0)], [1.0])
    est = approx.estimate_coeffs(approx.sample_function(f, rule), rule, A)
    assert abs(est.coeffs[0] - np.exp(2j * np.pi * N * shift[0])) <= 1e-10
    # one-term alias sum, with the sign of f_hat(h) - estimate
    assert abs(approx.alias_expansion(f, rule, (0, 0)) + np.exp(2j * np.pi * N * shift[0])) <= 1e-10


@settings(max_examples=60)
@given(st.integers(0, 2**31))
def test_aliasing_identity(seed):
    rng = np.random.default_rng(seed)
    rule = random_rule(rng)
    f = random_poly(rng)
    A = build_index_set(2, 1, (1.0, 1.0), 25)
    est = approx.estimate_coeffs(approx.sample_function(f, rule), rule, A)
    for h, c in zip(A.members, est.coeffs):
        assert abs((f.coefficient(h) - c) - approx.alias_expansion(f, rule, h)) <= 1e-10
    assert np.max(np.abs(approx.coefficient_errors(f, rule, A.members)
                         - (np.array([f.coefficient(h) for h in A.members]) - est.coeffs))) <= 1e-10


def test_alias_expansion_trivial():
    rule = ShiftedLatticeRule(LatticeRule(7, (1, 2)), (0.1, 0.2))
    assert approx.alias_expansion(FourierPolynomial([(1, 1)], [2.0]), rule, (1, 1)) == 0


def grid_error(f, a, n):
    g = np.arange(n) / n
    X = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    return float(np.mean(np.abs(f(X) - a(X)) ** 2))


@settings(max_examples=25)
@given(st.integers(0, 2**31))
def test_exact_error_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    rule = random_rule(rng)
    f = random_poly(rng, spread=15)
    A = build_index_set(2, 1, (1.0, 1.0), 30)
    a = approx.estimate_coeffs(approx.sample_function(f, rule), rule, A)
    # trapezoid rule on 64 points per axis is exact for degree below 32
    assert abs(approx.exact_sq_error_fixed(f, rule, A) - grid_error(f, a, 64)) <= 1e-8


def test_exact_error_trivial_cases():
    rule = ShiftedLatticeRule(LatticeRule(101, (1, 37)), (0.4, 0.6))
    A = build_index_set(2, 1, (1.0, 1.0), 4)
    assert approx.exact_sq_error_fixed(FourierPolynomial([(1, 0), (0, -2)], [1.0, 0.5j]), rule, A) <= 1e-14
    assert approx.exact_sq_error_fixed(FourierPolynomial([(50, 0)], [0.5]), rule, A) == pytest.approx(0.25)
    assert approx.exact_expected_sq_error_given_rule(FourierPolynomial([(1, 0)], [1.0]), rule.rule, A) == 0


def test_shift_average_matches_closed_form():
    rng = np.random.default_rng(11)
    rule = LatticeRule(31, (1, 12))
    f = random_poly(rng, spread=60)
    A = build_index_set(2, 1, (1.0, 1.0), 40)
    vals = np.array([approx.exact_sq_error_fixed(f, ShiftedLatticeRule(rule, rng.random(2)), A)
                     for _ in range(10_000)])
    target = approx.exact_expected_sq_error_given_rule(f, rule, A)
    assert abs(vals.mean() - target) <= 3 * vals.std(ddof=1) / 100


def test_unit_multiple_invariance():
    rng = np.random.default_rng(5)
    f = random_poly(rng, spread=30)
    A = build_index_set(2, 1, (1.0, 1.0), 20)
    N, z = 31, np.array([1, 12])
    base = approx.exact_expected_sq_error_given_rule(f, LatticeRule(N, z), A)
    for u in (2, 5, 30):
        other = LatticeRule(N, tuple(int(v) for v in (u * z) % N))
        assert approx.exact_expected_sq_error_given_rule(f, other, A) == pytest.approx(base, rel=1e-12)


def test_approximate_constant():
    cfg = CbcConfig(64, 2, 1, (1.0, 1.0), 0.5, 9)
    a = approx.approximate(lambda X: np.ones(len(X)), cfg, 5.0)
    assert abs(a.coefficient((0, 0)) - 1) <= 1e-10
    assert np.sum(np.abs(a.coeffs) > 1e-10) == 1
    assert a.to_json() == approx.approximate(lambda X: np.ones(len(X)), cfg, 5.0).to_json()
    assert {"N", "z", "shift", "seed", "T"} <= set(a.provenance)


def test_approximant_eval_and_json():
    rng = np.random.default_rng(2)
    f = random_poly(rng, spread=10)
    a = approx.approximate(f, CbcConfig(128, 2, 1, (1.0, 0.5), 0.5, 4), 20.0)
    x = rng.random((5, 2))
    naive = np.array([sum(c * np.exp(2j * np.pi * (h @ p)) for h, c in zip(a.index_set.members, a.coeffs))
                      for p in x])
    assert np.max(np.abs(a(x) - naive)) <= 1e-10
    b = approx.Approximant.from_json(a.to_json())
    assert np.array_equal(a.coeffs, b.coeffs) and b.provenance == json.loads(a.to_json())["provenance"]


def test_approximate_uses_construct_stream():
    from randlattice.cbc import randomized_cbc

    cfg = CbcConfig(300, 3, 1, (1.0, 0.5, 0.25), 0.5, 77)
    a = approx.approximate(FourierPolynomial([(0, 0, 0)], [1.0]), cfg, 3.0)
    res = randomized_cbc(cfg)
    assert a.provenance["N"] == res.rule.n_points and tuple(a.provenance["z"]) == res.rule.gen


def test_monte_carlo_seeding():
    f = kernel_truncation(2, 1, (1.0, 0.5), 20)
    cfg = CbcConfig(64, 2, 1, (1.0, 0.5), 0.5, 3)
    A = build_index_set(2, 1, (1.0, 0.5), 30)
    one, se = approx.rmse_monte_carlo(f, cfg, 30, 1, A=A)
    assert se == 0.0
    rule = approx._draw_rule(cfg, 0)
    assert one == approx.exact_sq_error_fixed(f, rule, A)
    _, _, short = approx.rmse_monte_carlo(f, cfg, 30, 10, A=A, return_samples=True)
    _, _, long = approx.rmse_monte_carlo(f, cfg, 30, 20, A=A, return_samples=True, threads=4)
    assert np.array_equal(short, long[:10])


def test_monte_carlo_matches_enumeration():
    gamma = (1.0, 0.5)
    f = random_unit_norm_poly(8, build_index_set(2, 1, gamma, 200), 1, gamma)
    A = build_index_set(2, 1, gamma, 12)
    exact = enumerated_expected_sq_error(f, 40, 0.5, 1, gamma, A)
    mean, se = approx.rmse_monte_carlo(f, CbcConfig(40, 2, 1, gamma, 0.5, 123), 12, 2000, A=A)
    assert abs(mean - exact) <= 3 * se


def test_stderr_shrinks():
    f = kernel_truncation(2, 1, (1.0, 0.5), 20)
    cfg = CbcConfig(64, 2, 1, (1.0, 0.5), 0.5, 1)
    _, s1 = approx.rmse_monte_carlo(f, cfg, 30, 400)
    _, s2 = approx.rmse_monte_carlo(f, cfg, 30, 800)
    assert 1.1 < s1 / s2 < 1.9
