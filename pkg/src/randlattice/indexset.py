"""Enumeration of the truncation set ``{h : r^2(h) <= T}``."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import korobov

__all__ = ["IndexSet", "build_index_set", "cardinality", "corollary_T", "DEFAULT_CAP"]

DEFAULT_CAP = 10_000_000


@dataclass(frozen=True, eq=False)
class IndexSet:
    """Explicit, lexicographically sorted list of multi-indices."""

    dim: int
    threshold: float
    members: np.ndarray

    def __len__(self) -> int:
        return self.members.shape[0]

    def to_json(self) -> str:
        return json.dumps([[int(v) for v in h] for h in self.members])

    def contains(self, H) -> np.ndarray:
        """Row-wise membership of ``H`` (exact, by integer key lookup)."""
        H = np.atleast_2d(np.asarray(H, dtype=np.int64))
        if len(self) == 0:
            return np.zeros(H.shape[0], dtype=bool)
        keys, probe = encode_pair(self.members, H)
        order = np.argsort(keys)
        pos = np.searchsorted(keys, probe, sorter=order)
        pos = np.minimum(pos, len(keys) - 1)
        return keys[order[pos]] == probe


def encode_pair(A: np.ndarray, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Injective int64 keys for the rows of two integer arrays of equal width."""
    both = np.concatenate([A, B]) if len(A) and len(B) else (A if len(A) else B)
    if both.size == 0:
        return np.zeros(len(A), dtype=np.int64), np.zeros(len(B), dtype=np.int64)
    lo = both.min(axis=0)
    span = both.max(axis=0) - lo + 1
    if np.sum(np.log2(span.astype(float))) > 62:
        raise OverflowError("index range too wide for integer keys")

    def enc(X):
        key = np.zeros(len(X), dtype=np.int64)
        for j in range(X.shape[1]):
            key = key * span[j] + (X[:, j] - lo[j])
        return key

    return enc(A), enc(B)


def _axis_limit(budget: np.ndarray, alpha: float, gj: float) -> np.ndarray:
    # largest |h| with |h|^{2 alpha} / gj^2 <= budget, before exact correction
    with np.errstate(over="ignore", invalid="ignore"):
        lim = np.floor((budget.astype(float) * gj * gj) ** (1.0 / (2.0 * alpha)))
    return np.nan_to_num(lim, posinf=2**40).astype(np.int64)


def _limits(cost: np.ndarray, alpha: float, gj: float, T) -> np.ndarray:
    """Largest admissible ``|h_j|`` for each prefix cost (``gj > 0``)."""
    limit = _axis_limit(T / cost, alpha, gj) + 1
    # settle the boundary with the same extended-precision product as r2_array
    while True:
        over = (limit > 0) & (cost * korobov._coord_r2(limit, alpha, gj) > T)
        if not over.any():
            break
        limit = np.where(over, limit - 1, limit)
    while True:
        nxt = limit + 1
        under = cost * korobov._coord_r2(nxt, alpha, gj) <= T
        if not under.any():
            break
        limit = np.where(under, nxt, limit)
    return limit


def _expand(prefix: np.ndarray, cost: np.ndarray, alpha: float, gj: float, T):
    """Extend every prefix by all admissible values of the next coordinate."""
    if gj == 0.0:
        return np.concatenate([prefix, np.zeros((len(prefix), 1), dtype=np.int64)], axis=1), cost
    limit = _limits(cost, alpha, gj, T)
    reps = 2 * limit + 1
    total = int(reps.sum())
    parent = np.repeat(np.arange(len(cost)), reps)
    starts = np.cumsum(reps) - reps
    h = np.arange(total, dtype=np.int64) - np.repeat(starts, reps) - np.repeat(limit, reps)
    new_cost = cost[parent] * korobov._coord_r2(h, alpha, gj)
    new_prefix = np.concatenate([prefix[parent], h[:, None]], axis=1)
    return new_prefix, new_cost


def _walk(d, alpha, gamma, T, cap, count_only=False):
    alpha = korobov.check_alpha(alpha)
    g = korobov.as_gamma(gamma, d)
    T = np.longdouble(T)
    if not T > 0:
        raise ValueError("threshold T must be positive")
    if T < 1:
        return 0 if count_only else np.zeros((0, d), dtype=np.int64)
    prefix = np.zeros((1, 0), dtype=np.int64)
    cost = np.ones(1, dtype=np.longdouble)
    active = [j for j in range(d) if g[j] > 0]
    for j in range(d):
        if count_only and active and j == active[-1]:
            # last free coordinate: count its admissible values instead of listing them
            return int(np.sum(2 * _limits(cost, alpha, g[j], T) + 1))
        if count_only and g[j] == 0.0:
            continue
        prefix, cost = _expand(prefix, cost, alpha, g[j], T)
        if len(cost) > cap:
            raise ValueError(f"index set exceeds the cap of {cap} members")
    return len(cost) if count_only else prefix


def build_index_set(d: int, alpha, gamma, T, cap: int = DEFAULT_CAP) -> IndexSet:
    """All ``h`` in ``Z^d`` with ``r^2(h) <= T``, sorted lexicographically.

    Coordinates are filled one at a time; each admits ``|h_j|`` up to
    ``(sqrt(budget) gamma_j)^(1/alpha)`` where the budget is ``T`` divided by
    the cost of the prefix. Boundary cases are settled with the same
    extended-precision product that :func:`korobov.r2_array` uses.
    """
    H = _walk(d, alpha, gamma, T, cap)
    if len(H):
        H = H[np.lexsort(H.T[::-1])]
    return IndexSet(int(d), float(T), H)


def cardinality(T, d: int, alpha, gamma, cap: int = DEFAULT_CAP) -> int:
    """Size of the truncation set; the last free coordinate is counted, not listed."""
    return int(_walk(d, alpha, gamma, T, cap, count_only=True))


def corollary_T(M, alpha, lam, beta) -> float:
    """Threshold ``M^(lam - lam beta / (2 alpha) + 1/4)`` balancing the two error terms.

    Requires ``1/2 < lam < alpha`` and ``0 < beta < min(alpha (1 - 1/(2 lam)), 1)``.
    """
    alpha = korobov.check_alpha(alpha)
    lam, beta = float(lam), float(beta)
    if not 0.5 < lam < alpha:
        raise ValueError(f"lambda must lie in (1/2, alpha) = (0.5, {alpha}), got {lam}")
    beta_max = min(alpha * (1.0 - 1.0 / (2.0 * lam)), 1.0)
    if not 0.0 < beta < beta_max:
        raise ValueError(f"beta must lie in (0, {beta_max:.6g}), got {beta}")
    return float(M) ** (lam - lam * beta / (2.0 * alpha) + 0.25)
