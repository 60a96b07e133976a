import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from randlattice import korobov


def zeta_oracle(s, K=2000):
    # partial sum plus Euler-Maclaurin tail
    n = np.arange(1, K, dtype=float)
    return float(np.sum(n ** -s)) + K ** (1 - s) / (s - 1) + 0.5 * K ** -s + s * K ** (-s - 1) / 12


def test_r_examples():
    assert korobov.r_alpha_gamma((0, 0), 1, (0.3, 0.7)) == 1.0
    assert korobov.r_alpha_gamma((2, 0), 1, (0.5, 1.0)) == pytest.approx(4.0)
    assert korobov.r_alpha_gamma((-3, 2), 2, (1.0, 0.5)) == pytest.approx(9 * 8)
    assert korobov.r_alpha_gamma((0, 1), 1, (1.0, 0.0)) == math.inf
    assert korobov.r_alpha_gamma((1, 0), 1, (1.0, 0.0)) == 1.0


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=4),
       st.sampled_from([0.75, 1.0, 1.5, 2.0]))
def test_r2_array_matches_scalar(h, alpha):
    g = np.linspace(0.2, 1.0, len(h))
    r = korobov.r_alpha_gamma(h, alpha, g)
    r2 = korobov.r2_array(np.array([h]), alpha, g)[0]
    assert float(r2) == pytest.approx(r * r, rel=1e-12)
    assert korobov.inv_r2_array(np.array([h]), alpha, g)[0] == pytest.approx(1 / (r * r), rel=1e-12)


def test_inv_r2_zero_weight():
    H = np.array([[0, 0], [0, 3], [2, 0]])
    out = korobov.inv_r2_array(H, 1, (1.0, 0.0))
    assert out.tolist() == [1.0, 0.0, 0.25]


def test_check_alpha():
    with pytest.raises(ValueError):
        korobov.check_alpha(0.5)
    with pytest.raises(ValueError):
        korobov.as_gamma((1.2,), 1)
    with pytest.raises(ValueError):
        korobov.as_gamma((1.0,), 2)


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_bernoulli_matches_series(alpha):
    x = np.linspace(0, 1, 37)
    k = np.arange(1, 20001)
    series = 2 * np.cos(2 * np.pi * np.outer(x, k)) @ (k ** (-2.0 * alpha))
    tail = 2 * 20000 ** (1 - 2 * alpha) / (2 * alpha - 1)
    assert np.max(np.abs(korobov.decay_sum(alpha, x) - series)) <= tail + 1e-12


def test_decay_sum_at_zero():
    assert korobov.decay_sum(1, 0.0) == pytest.approx(math.pi ** 2 / 3, rel=1e-14)
    assert korobov.decay_sum(2, 0.0) == pytest.approx(2 * math.pi ** 4 / 90, rel=1e-14)
    assert korobov.bernoulli_even(1, 0.0) == pytest.approx(1 / 6)


def test_decay_sum_series_route():
    val, tail = korobov.decay_sum(0.75, np.array([0.1, 0.5]), K=4000, return_tail=True)
    ref, _ = korobov.decay_sum(0.75, np.array([0.1, 0.5]), K=100000, return_tail=True)
    assert tail > 0
    assert np.all(np.abs(val - ref) <= tail)


@pytest.mark.parametrize("alpha,N", [(1, 13), (2, 31), (0.75, 17), (1.5, 7)])
def test_decay_sum_on_grid(alpha, N):
    vals, tail = korobov.decay_sum_on_grid(alpha, N, 5000)
    direct = korobov.decay_sum(alpha, np.arange(N) / N, K=5000)
    assert np.max(np.abs(vals - direct)) <= 1e-9


@given(st.floats(1.001, 12.0))
def test_zeta_against_oracle(s):
    assert korobov.zeta(s) == pytest.approx(zeta_oracle(s), rel=1e-11, abs=1e-11)


def test_zeta_domain():
    assert korobov.zeta(2) == pytest.approx(math.pi ** 2 / 6, rel=1e-15)
    with pytest.raises(ValueError):
        korobov.zeta(1.0)


def test_korobov_norm():
    from randlattice.testfns import FourierPolynomial

    f = FourierPolynomial([(0, 0), (1, 0), (0, -2)], [1.0, 2j, 0.5])
    # 1 + 4 * (1/0.5)^2 + 0.25 * (2/1)^2 with alpha = 1, gamma = (0.5, 1)
    assert korobov.korobov_norm_sq(f, 1, (0.5, 1.0)) == pytest.approx(1 + 16 + 1)
    assert korobov.korobov_norm_sq(f, 1, (0.5, 0.0)) == math.inf
