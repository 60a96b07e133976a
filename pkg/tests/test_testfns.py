import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from randlattice import korobov
from randlattice.indexset import build_index_set
from randlattice.testfns import (FourierPolynomial, KernelFunction, fooling_function, fooling_support,
                                 kernel_truncation, random_unit_norm_poly)

terms = st.lists(
    st.tuples(st.tuples(st.integers(-20, 20), st.integers(-20, 20)),
              st.floats(-5, 5), st.floats(-5, 5)),
    min_size=1, max_size=15)


@given(terms)
def test_json_round_trip(tt):
    f = FourierPolynomial([t[0] for t in tt], [complex(t[1], t[2]) for t in tt])
    g = FourierPolynomial.from_json(f.to_json())
    assert np.array_equal(f.indices, g.indices)
    assert np.array_equal(f.coeffs, g.coeffs)


def test_duplicates_merge():
    f = FourierPolynomial([(1, 0), (1, 0), (0, 2)], [1.0, 2.0, 1j])
    assert len(f) == 2
    assert f.coefficient((1, 0)) == 3.0
    assert f.coefficient((5, 5)) == 0


@pytest.mark.parametrize("text", ['{"dim": 2}', '[1, 2]', '{"dim": 2, "terms": [{"h": [1]}]}',
                                  '{"dim": 1, "terms": [{"re": 1}]}'])
def test_from_json_rejects(text):
    with pytest.raises(ValueError):
        FourierPolynomial.from_json(text)


@given(terms, st.lists(st.floats(0, 1, exclude_max=True), min_size=2, max_size=2))
def test_eval_matches_direct_sum(tt, x):
    f = FourierPolynomial([t[0] for t in tt], [complex(t[1], t[2]) for t in tt])
    direct = sum(c * np.exp(2j * np.pi * np.dot(h, x)) for h, c in zip(f.indices, f.coeffs))
    assert abs(f(np.array(x)) - direct) <= 1e-10 * (1 + np.abs(f.coeffs).sum())


def test_kernel_function_matches_coefficients():
    kf = KernelFunction(1, (1.0, 0.5), 2)
    x = np.array([[0.1, 0.7], [0.33, 0.0], [0.9, 0.45]])
    trunc = kernel_truncation(2, 1, (1.0, 0.5), 400, normalize=False)
    # truncation error is below 2 * sum_{|k| > 400} k^-2 per factor
    assert np.max(np.abs(kf(x) - trunc(x).real)) <= 0.02


def test_kernel_requires_integer_alpha():
    with pytest.raises(ValueError):
        KernelFunction(1.5, (1.0,), 1)


def test_unit_norm():
    A = build_index_set(2, 1, (1.0, 0.5), 40)
    f = random_unit_norm_poly(3, A, 1, (1.0, 0.5))
    assert korobov.korobov_norm_sq(f, 1, (1.0, 0.5)) == pytest.approx(1.0, rel=1e-12)
    k = kernel_truncation(2, 2, (1.0, 0.5), 30)
    assert korobov.korobov_norm_sq(k, 2, (1.0, 0.5)) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("M,alpha", [(4, 1), (10, 2), (20, 1), (101, 1.5)])
def test_fooling_function(M, alpha):
    f = fooling_function(M, 3, alpha, (1.0, 0.7, 0.2))
    K = int(np.sqrt(M))
    assert len(f) == (2 * K + 1) ** 2
    assert np.all(f.indices[:, 2] == 0)
    assert korobov.korobov_norm_sq(f, alpha, (1.0, 0.7, 0.2)) == pytest.approx(1.0, rel=1e-12)
    # equal Korobov energy on every frequency
    energy = korobov.r2_array(f.indices, alpha, (1.0, 0.7, 0.2)).astype(float) * np.abs(f.coeffs) ** 2
    assert np.allclose(energy, 1 / len(f))


def test_fooling_errors():
    with pytest.raises(ValueError):
        fooling_function(10, 1, 1, (1.0,))
    with pytest.raises(ValueError):
        fooling_function(3, 2, 1, (1.0, 1.0))
    with pytest.raises(ValueError):
        fooling_function(10, 2, 1, (1.0, 0.0))
    assert fooling_support(10, 2).shape == (49, 2)
