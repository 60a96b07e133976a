"""
Test functions with exactly known Fourier coefficients.

Everything here is either a trigonometric polynomial (finite Fourier support)
or the closed-form kernel ``x -> K(x, 0)``, so approximation errors can be
computed exactly from coefficients rather than estimated by quadrature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import korobov

__all__ = [
    "FourierPolynomial",
    "KernelFunction",
    "eval_poly",
    "random_unit_norm_poly",
    "kernel_function_eval",
    "fooling_support",
    "fooling_function",
    "kernel_truncation",
]


class FourierPolynomial:
    """Finite map from integer multi-indices to complex coefficients.

    Parameters
    ----------
    indices : array_like of int, shape (n, d)
        Frequencies. Duplicates are merged by adding their coefficients.
    coeffs : array_like of complex, shape (n,)
    dim : int, optional
        Needed only when ``indices`` is empty.
    """

    def __init__(self, indices, coeffs, dim: int | None = None):
        idx = np.asarray(indices, dtype=np.int64)
        c = np.asarray(coeffs, dtype=complex).ravel()
        if idx.size == 0:
            if dim is None:
                raise ValueError("dim is required for an empty polynomial")
            idx = idx.reshape(0, int(dim))
        idx = np.atleast_2d(idx)
        if dim is not None and idx.shape[1] != dim:
            raise ValueError(f"indices have dimension {idx.shape[1]}, expected {dim}")
        if idx.shape[0] != c.shape[0]:
            raise ValueError("indices and coeffs differ in length")
        if idx.shape[0]:
            uniq, inv = np.unique(idx, axis=0, return_inverse=True)
            if uniq.shape[0] != idx.shape[0]:
                merged = np.zeros(uniq.shape[0], dtype=complex)
                np.add.at(merged, inv.ravel(), c)
                idx, c = uniq, merged
        self.indices = idx
        self.coeffs = c
        self.dim = idx.shape[1]

    @classmethod
    def from_dict(cls, terms: dict, dim: int | None = None) -> "FourierPolynomial":
        keys = list(terms)
        if dim is None and not keys:
            raise ValueError("dim is required for an empty polynomial")
        return cls([tuple(k) for k in keys], [terms[k] for k in keys], dim=dim)

    def as_dict(self) -> dict:
        return {tuple(int(v) for v in h): complex(c) for h, c in zip(self.indices, self.coeffs)}

    def coefficient(self, h) -> complex:
        h = np.asarray(h, dtype=np.int64)
        hit = np.all(self.indices == h, axis=1)
        return complex(self.coeffs[hit][0]) if hit.any() else 0.0j

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __call__(self, x):
        return eval_poly(self, x)

    def l2_norm_sq(self) -> float:
        """Plain L2 norm squared, by Parseval."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def to_json(self) -> str:
        terms = [
            {"h": [int(v) for v in h], "re": float(c.real), "im": float(c.imag)}
            for h, c in zip(self.indices, self.coeffs)
        ]
        return json.dumps({"dim": self.dim, "terms": terms})

    @classmethod
    def from_json(cls, text: str) -> "FourierPolynomial":
        obj = json.loads(text)
        if not isinstance(obj, dict) or "dim" not in obj or "terms" not in obj:
            raise ValueError('expected an object with "dim" and "terms"')
        dim = int(obj["dim"])
        idx, c = [], []
        for i, t in enumerate(obj["terms"]):
            try:
                h = [int(v) for v in t["h"]]
                val = complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"term {i}: {exc!r}") from None
            if len(h) != dim:
                raise ValueError(f"term {i}: index has length {len(h)}, expected {dim}")
            idx.append(h)
            c.append(val)
        return cls(idx, c, dim=dim)

    def __repr__(self):
        return f"FourierPolynomial(dim={self.dim}, terms={len(self)})"


def eval_poly(f: FourierPolynomial, x):
    """Evaluate ``sum_h f_hat(h) exp(2 pi i h.x)`` at one point or a batch of rows."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != f.dim:
        raise ValueError(f"points have dimension {X.shape[1]}, polynomial has {f.dim}")
    out = np.zeros(X.shape[0], dtype=complex)
    step = max(1, 2_000_000 // max(1, len(f)))
    for s in range(0, X.shape[0], step):
        phase = X[s:s + step] @ f.indices.T.astype(float)
        out[s:s + step] = np.exp(2j * np.pi * phase) @ f.coeffs
    return complex(out[0]) if single else out


def random_unit_norm_poly(seed, support, alpha, gamma) -> FourierPolynomial:
    """Random complex coefficients on ``support`` scaled to Korobov norm one."""
    members = np.asarray(getattr(support, "members", support), dtype=np.int64)
    members = np.atleast_2d(members) if members.size else members
    if members.size == 0:
        raise ValueError("support must be nonempty")
    r2 = korobov.r2_array(members, alpha, gamma)
    if np.any(np.isinf(r2)):
        raise ValueError("support contains a frequency with infinite decay value")
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(len(members)) + 1j * rng.standard_normal(len(members))
    f = FourierPolynomial(members, c)
    return FourierPolynomial(f.indices, f.coeffs / math.sqrt(korobov.korobov_norm_sq(f, alpha, gamma)))


@dataclass(frozen=True)
class KernelFunction:
    """``x -> K(x, 0)``, the function whose coefficients are ``1 / r^2(h)``."""

    alpha: int
    gamma: tuple
    dim: int

    def __post_init__(self):
        if not korobov.is_integer_alpha(self.alpha):
            raise ValueError("the closed-form kernel needs integer alpha")
        korobov.as_gamma(self.gamma, self.dim)

    def __call__(self, x):
        return kernel_function_eval(self, x)


def kernel_function_eval(kf: KernelFunction, x):
    """``prod_j (1 + gamma_j^2 c_alpha B_{2 alpha}(x_j))`` at points ``x``."""
    if not korobov.is_integer_alpha(kf.alpha):
        raise ValueError("the closed-form kernel needs integer alpha")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    g = korobov.as_gamma(kf.gamma, kf.dim)
    out = np.ones(X.shape[0])
    for j in range(kf.dim):
        if g[j] == 0:
            continue
        out *= 1.0 + g[j] ** 2 * korobov.decay_sum(kf.alpha, X[:, j])
    return float(out[0]) if single else out


def fooling_support(M: int, d: int) -> np.ndarray:
    """Frequencies ``(h1, h2, 0, ..., 0)`` with ``|h1|, |h2| <= floor(sqrt(M))``."""
    K = math.isqrt(int(M))
    rng = np.arange(-K, K + 1)
    h1, h2 = np.meshgrid(rng, rng, indexing="ij")
    out = np.zeros((h1.size, d), dtype=np.int64)
    out[:, 0] = h1.ravel()
    out[:, 1] = h2.ravel()
    return out


def fooling_function(M: int, d: int, alpha, gamma) -> FourierPolynomial:
    """Unit-norm polynomial with equal Korobov energy on every fooling frequency.

    The coefficient on each ``h`` in the support is
    ``(r^2(h) * |support|)^(-1/2)``.
    """
    if d < 2:
        raise ValueError("the fooling function needs d >= 2")
    if M < 4:
        raise ValueError("the fooling function needs M >= 4")
    g = korobov.as_gamma(gamma, d)
    if g[0] == 0 or g[1] == 0:
        raise ValueError("the first two weights must be positive")
    H = fooling_support(M, d)
    r2 = korobov.r2_array(H, alpha, g).astype(float)
    return FourierPolynomial(H, 1.0 / np.sqrt(r2 * len(H)))


def kernel_truncation(d: int, alpha, gamma, radius: int, normalize: bool = True) -> FourierPolynomial:
    """Kernel coefficients ``1 / r^2(h)`` restricted to the box ``|h_j| <= radius``.

    Coordinates with zero weight only carry ``h_j = 0``. With ``normalize``
    the result is scaled to Korobov norm one.
    """
    g = korobov.as_gamma(gamma, d)
    axes = [np.arange(-radius, radius + 1) if g[j] > 0 else np.zeros(1, dtype=np.int64) for j in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    H = np.stack([a.ravel() for a in grids], axis=1).astype(np.int64)
    c = korobov.inv_r2_array(H, alpha, g)
    f = FourierPolynomial(H, c)
    if normalize:
        f = FourierPolynomial(f.indices, f.coeffs / math.sqrt(korobov.korobov_norm_sq(f, alpha, g)))
    return f
