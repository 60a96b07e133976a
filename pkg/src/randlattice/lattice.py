"""Rank-1 lattice point sets, their dual lattices and the prime pool for N."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LatticeRule",
    "ShiftedLatticeRule",
    "lattice_points",
    "dot_mod",
    "dual_contains",
    "character_sum",
    "primes_in_range",
    "is_prime",
]


@dataclass(frozen=True)
class LatticeRule:
    """Rank-1 lattice rule with ``n_points`` points and generating vector ``gen``."""

    n_points: int
    gen: tuple

    def __post_init__(self):
        N = int(self.n_points)
        gen = tuple(int(v) for v in np.atleast_1d(self.gen))
        if N < 2:
            raise ValueError(f"a lattice rule needs N >= 2, got {N}")
        if not gen:
            raise ValueError("generating vector must be nonempty")
        if any(not 1 <= v <= N - 1 for v in gen):
            raise ValueError(f"generating vector entries must lie in 1..{N - 1}, got {gen}")
        object.__setattr__(self, "n_points", N)
        object.__setattr__(self, "gen", gen)

    @property
    def dim(self) -> int:
        return len(self.gen)

    def points(self) -> np.ndarray:
        return lattice_points(self)


@dataclass(frozen=True)
class ShiftedLatticeRule:
    rule: LatticeRule
    shift: tuple

    def __post_init__(self):
        shift = tuple(float(v) for v in np.atleast_1d(self.shift))
        if len(shift) != self.rule.dim:
            raise ValueError("shift dimension does not match the rule")
        if any(not 0.0 <= v < 1.0 for v in shift):
            raise ValueError(f"shift entries must lie in [0, 1), got {shift}")
        object.__setattr__(self, "shift", shift)

    @classmethod
    def unshifted(cls, rule: LatticeRule) -> "ShiftedLatticeRule":
        return cls(rule, (0.0,) * rule.dim)

    @property
    def n_points(self) -> int:
        return self.rule.n_points

    @property
    def gen(self) -> tuple:
        return self.rule.gen

    @property
    def dim(self) -> int:
        return self.rule.dim

    def points(self) -> np.ndarray:
        P = lattice_points(self.rule) + np.asarray(self.shift)
        return P - np.floor(P)


def lattice_points(rule: LatticeRule) -> np.ndarray:
    """The ``N`` points ``(n z_j mod N) / N`` as an ``(N, d)`` array in index order."""
    N = rule.n_points
    n = np.arange(N, dtype=np.int64)[:, None]
    z = np.asarray(rule.gen, dtype=np.int64)[None, :]
    return ((n * z) % N) / N


def dot_mod(H, gen, N: int) -> np.ndarray:
    """``h . z mod N`` for each row of ``H``, exact in int64.

    Each coordinate is reduced before multiplying so the products stay below
    ``N^2``; fine for ``N < 2^31``.
    """
    H = np.atleast_2d(np.asarray(H, dtype=np.int64))
    z = np.asarray(gen, dtype=np.int64)
    if H.shape[1] != z.shape[0]:
        raise ValueError(f"index dimension {H.shape[1]} does not match rule dimension {z.shape[0]}")
    acc = np.zeros(H.shape[0], dtype=np.int64)
    for j in range(H.shape[1]):
        acc = (acc + (H[:, j] % N) * z[j]) % N
    return acc


def dual_contains(rule: LatticeRule, ell) -> bool | np.ndarray:
    """Whether ``ell . z == 0 (mod N)``; vectorised over rows of a 2-d input."""
    ell_arr = np.asarray(ell)
    if ell_arr.ndim <= 1:
        if len(np.atleast_1d(ell_arr)) != rule.dim:
            raise ValueError("index dimension does not match the rule")
        s = sum(int(a) * b for a, b in zip(np.atleast_1d(ell_arr), rule.gen))
        return s % rule.n_points == 0
    return dot_mod(ell_arr, rule.gen, rule.n_points) == 0


def character_sum(rule: LatticeRule, h) -> complex:
    """Lattice average of ``exp(2 pi i h . x_n)``, summed in floating point."""
    h = np.atleast_1d(np.asarray(h, dtype=np.int64))
    if h.shape[0] != rule.dim:
        raise ValueError("index dimension does not match the rule")
    # phases from the points themselves, not from h.z mod N
    X = lattice_points(rule)
    return complex(np.mean(np.exp(2j * np.pi * (X @ h.astype(float)))))


def primes_in_range(M: int) -> list[int]:
    """All primes ``N`` with ``ceil(M/2) < N <= M``."""
    M = int(M)
    if M < 4:
        raise ValueError(f"need M >= 4, got {M}")
    sieve = np.ones(M + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(M) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    lo = -(-M // 2)
    return [int(p) for p in np.flatnonzero(sieve) if p > lo]


def is_prime(n: int) -> bool:
    n = int(n)
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for p in range(3, math.isqrt(n) + 1, 2):
        if n % p == 0:
            return False
    return True
