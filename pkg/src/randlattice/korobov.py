"""
Weighted Korobov space arithmetic.

The decay function

    r(h) = prod_{j : h_j != 0} |h_j|^alpha / gamma_j,     r(0) = 1,

Bernoulli polynomials of even degree, the Riemann zeta function and the
Korobov norm of trigonometric polynomials. ``r`` takes the value ``inf``
when a frequency touches a coordinate with zero weight; sums downstream
treat ``1 / inf`` as zero.
"""

from __future__ import annotations

import math
from numbers import Integral

import numpy as np
from scipy import special

__all__ = [
    "SUPPORTED_BERNOULLI_ALPHAS",
    "as_gamma",
    "is_integer_alpha",
    "check_alpha",
    "r_alpha_gamma",
    "r2_array",
    "inv_r2_array",
    "bernoulli_even",
    "bernoulli_scale",
    "decay_sum",
    "decay_sum_on_grid",
    "zeta",
    "korobov_norm_sq",
]

# Degrees with hard-coded Bernoulli coefficients (B_2, B_4, B_6).
SUPPORTED_BERNOULLI_ALPHAS = (1, 2, 3)

_BERNOULLI_COEFFS = {
    # highest power first, for np.polyval
    1: np.array([1.0, -1.0, 1.0 / 6.0]),
    2: np.array([1.0, -2.0, 1.0, 0.0, -1.0 / 30.0]),
    3: np.array([1.0, -3.0, 2.5, 0.0, -0.5, 0.0, 1.0 / 42.0]),
}

DEFAULT_SERIES_TERMS = 100_000


def is_integer_alpha(alpha) -> bool:
    return float(alpha).is_integer()


def check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not alpha > 0.5:
        raise ValueError(f"smoothness alpha must exceed 1/2, got {alpha}")
    return alpha


def as_gamma(gamma, d: int | None = None) -> np.ndarray:
    """Validate a product-weight sequence and cut it to the first ``d`` entries."""
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if g.ndim != 1:
        raise ValueError("weights must be a flat sequence")
    if np.any(~np.isfinite(g)) or np.any(g < 0) or np.any(g > 1):
        raise ValueError(f"every weight must lie in [0, 1], got {g.tolist()}")
    if d is not None:
        if len(g) < d:
            raise ValueError(f"need at least {d} weights, got {len(g)}")
        g = g[:d]
    return g


def r_alpha_gamma(h, alpha, gamma) -> float:
    """Decay function of a single multi-index; ``inf`` on zero-weight coordinates.

    >>> r_alpha_gamma((2, 0), 1, (0.5, 1.0))
    4.0
    """
    h = [int(v) for v in np.atleast_1d(h)]
    alpha = check_alpha(alpha)
    g = as_gamma(gamma, len(h))
    out = 1.0
    for hj, gj in zip(h, g):
        if hj == 0:
            continue
        if gj == 0.0:
            return math.inf
        out *= abs(hj) ** alpha / gj
    return out


def r2_array(H, alpha, gamma) -> np.ndarray:
    """Squared decay ``r^2(h)`` for each row of ``H`` in extended precision.

    Factors are multiplied in coordinate order so that index-set enumeration,
    which accumulates the same product coordinate by coordinate, agrees with
    this function bit for bit at the ``r^2 <= T`` boundary.
    """
    H = np.atleast_2d(np.asarray(H, dtype=np.int64))
    alpha = check_alpha(alpha)
    g = as_gamma(gamma, H.shape[1])
    out = np.ones(H.shape[0], dtype=np.longdouble)
    for j in range(H.shape[1]):
        out = out * _coord_r2(H[:, j], alpha, g[j])
    return out


def _coord_r2(hj: np.ndarray, alpha: float, gj: float) -> np.ndarray:
    a = np.abs(hj).astype(np.longdouble)
    with np.errstate(divide="ignore", invalid="ignore"):
        if gj == 0.0:
            fac = np.where(hj == 0, np.longdouble(1), np.longdouble(np.inf))
        else:
            g2 = np.longdouble(gj) * np.longdouble(gj)
            fac = np.where(hj == 0, np.longdouble(1), a ** np.longdouble(2 * alpha) / g2)
    return fac


def inv_r2_array(H, alpha, gamma) -> np.ndarray:
    """``1 / r^2(h)`` as float64, zero where ``r`` is infinite."""
    r2 = r2_array(H, alpha, gamma)
    return (np.longdouble(1) / r2).astype(float)


def bernoulli_even(alpha, x):
    """Bernoulli polynomial ``B_{2 alpha}(x)`` for ``alpha`` in {1, 2, 3}.

    Higher or fractional smoothness goes through :func:`decay_sum`, which
    evaluates the same periodic function from its Fourier series.
    """
    if not is_integer_alpha(alpha) or int(alpha) not in _BERNOULLI_COEFFS:
        raise ValueError(
            f"exact Bernoulli polynomials are available for alpha in "
            f"{SUPPORTED_BERNOULLI_ALPHAS}; got {alpha}"
        )
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("x must lie in [0, 1]")
    val = np.polyval(_BERNOULLI_COEFFS[int(alpha)], x)
    return float(val) if val.ndim == 0 else val


def bernoulli_scale(alpha: int) -> float:
    """The factor ``(-1)^(alpha+1) (2 pi)^(2 alpha) / (2 alpha)!``."""
    alpha = int(alpha)
    return (-1) ** (alpha + 1) * (2 * math.pi) ** (2 * alpha) / math.factorial(2 * alpha)


def _series_tail(alpha: float, K: int) -> float:
    # sum_{|k| > K} |k|^{-2 alpha} <= 2 K^{1 - 2 alpha} / (2 alpha - 1)
    return 2.0 * K ** (1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0)


def decay_sum(alpha, x, K: int = DEFAULT_SERIES_TERMS, return_tail: bool = False):
    """Periodic function ``sum_{k != 0} exp(2 pi i k x) / |k|^{2 alpha}``.

    Exact (through Bernoulli polynomials) for integer ``alpha`` up to 3;
    otherwise the symmetric series truncated at ``|k| <= K``. With
    ``return_tail`` the absolute truncation bound is returned as well
    (zero on the exact path).
    """
    alpha = check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    if is_integer_alpha(alpha) and int(alpha) in _BERNOULLI_COEFFS:
        frac = x - np.floor(x)
        val = bernoulli_scale(int(alpha)) * np.polyval(_BERNOULLI_COEFFS[int(alpha)], frac)
        tail = 0.0
    else:
        k = np.arange(1, K + 1, dtype=float)
        w = 2.0 * k ** (-2.0 * alpha)
        flat = np.atleast_1d(x).ravel()
        val = np.empty_like(flat)
        for start in range(0, flat.size, 64):
            chunk = flat[start:start + 64]
            val[start:start + 64] = np.cos(2 * np.pi * np.outer(chunk, k)) @ w
        val = val.reshape(x.shape)
        tail = _series_tail(alpha, K)
    val = float(val) if np.ndim(val) == 0 else val
    return (val, tail) if return_tail else val


def decay_sum_on_grid(alpha, N: int, K: int = DEFAULT_SERIES_TERMS):
    """:func:`decay_sum` at the points ``j / N``, ``j = 0..N-1``.

    The series path folds the frequencies into residue classes mod ``N`` and
    applies one length-``N`` FFT. Returns ``(values, tail_bound)``.
    """
    alpha = check_alpha(alpha)
    N = int(N)
    if is_integer_alpha(alpha) and int(alpha) in _BERNOULLI_COEFFS:
        return decay_sum(alpha, np.arange(N) / N), 0.0
    k = np.arange(1, K + 1)
    w = k.astype(float) ** (-2.0 * alpha)
    folded = np.bincount(k % N, weights=w, minlength=N)
    folded = folded + np.bincount((-k) % N, weights=w, minlength=N)
    vals = np.fft.fft(folded).real
    return vals, _series_tail(alpha, K)


def zeta(s) -> float:
    """Riemann zeta for real ``s > 1`` (absolute accuracy well below 1e-12)."""
    s = float(s)
    if not s > 1.0:
        raise ValueError(f"zeta needs s > 1, got {s}")
    return float(special.zeta(s, 1))


def korobov_norm_sq(f, alpha, gamma) -> float:
    """``sum_h r^2(h) |f_hat(h)|^2``; ``inf`` if mass sits on an infinite ``r``."""
    coeffs = np.asarray(f.coeffs)
    if coeffs.size == 0:
        return 0.0
    r2 = r2_array(f.indices, alpha, gamma)
    mass = np.abs(coeffs) ** 2
    nz = mass > 0
    if np.any(np.isinf(r2[nz])):
        return math.inf
    return float(np.sum(r2[nz] * mass[nz].astype(np.longdouble)))
