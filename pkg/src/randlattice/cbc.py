"""
Quality criterion for generating vectors and the randomized CBC construction.

The criterion of a rank-1 lattice rule ``(N, z)`` is

    R^2 = sum_{h in Z^d} sum_{l in dual \\ {0}} 1 / (r^2(h) r^2(h + l)),

which in product-weight spaces collapses to a lattice average of products of
one-dimensional factors ``(1 + gamma_j^2 w(k z_j / N))^2`` where
``w(x) = sum_{k != 0} exp(2 pi i k x) / |k|^{2 alpha}`` (a scaled Bernoulli
polynomial for integer ``alpha``). :func:`criterion_formula` evaluates that
average, :func:`criterion_direct` sums the defining double series over a box,
and :func:`candidate_scores` scores every extension ``z_s`` at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import korobov
from .lattice import LatticeRule, is_prime, primes_in_range

__all__ = [
    "CbcConfig",
    "CbcResult",
    "DirectCriterion",
    "criterion_direct",
    "criterion_direct_naive",
    "criterion_formula",
    "criterion_formula_sq",
    "candidate_scores",
    "candidate_set_size",
    "select_candidate_set",
    "primitive_root",
    "randomized_cbc",
    "make_rng",
]

NEG_CLAMP = -1e-9
MAX_DIRECT_RESIDUES = 5000
MAX_DIRECT_RADIUS = 100_000


@dataclass(frozen=True)
class CbcConfig:
    """Parameters of one randomized CBC run."""

    M: int
    d: int
    alpha: float
    gamma: tuple
    tau: float
    seed: int

    def __post_init__(self):
        if int(self.M) < 4:
            raise ValueError(f"M must be at least 4, got {self.M}")
        if int(self.d) < 1:
            raise ValueError(f"d must be at least 1, got {self.d}")
        korobov.check_alpha(self.alpha)
        g = korobov.as_gamma(self.gamma, int(self.d))
        if not 0.0 < float(self.tau) < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "gamma", tuple(float(v) for v in g))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass
class CbcResult:
    rule: LatticeRule
    per_step_scores: list
    candidate_set_sizes: list
    seed: int = 0
    tau: float = 0.5
    candidate_sets: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "N": self.rule.n_points,
            "z": list(self.rule.gen),
            "scores": [float(v) for v in self.per_step_scores],
            "seed": int(self.seed),
            "tau": float(self.tau),
            "candidate_set_sizes": [int(v) for v in self.candidate_set_sizes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class DirectCriterion(NamedTuple):
    value: float
    value_sq: float
    tail_sq: float


def make_rng(seed) -> np.random.Generator:
    """PCG64 stream from a seed or a ``SeedSequence``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.PCG64(ss))


# --------------------------------------------------------------------------
# criterion, brute force


def _one_dim_decay(alpha: float, gj: float, lo: int, hi: int) -> np.ndarray:
    h = np.arange(lo, hi + 1, dtype=np.int64)[:, None]
    return korobov.inv_r2_array(h, alpha, (gj,))


def _pair_sums(alpha: float, gj: float, K: int) -> np.ndarray:
    """``s(m) = sum_{|h| <= K} a(h) a(h + m)`` for ``|m| <= K``, with ``a = 1/r^2``."""
    a_full = _one_dim_decay(alpha, gj, -2 * K, 2 * K)
    a_core = a_full[K:3 * K + 1]
    return np.correlate(a_full, a_core, mode="valid")


def criterion_direct(rule: LatticeRule, alpha, gamma, trunc_radius: int) -> DirectCriterion:
    """Sum the defining double series over ``|h_j|, |l_j| <= trunc_radius``.

    The one-dimensional inner sums are taken literally; the dual-lattice
    restriction ``l . z == 0 (mod N)`` is enforced exactly by collecting each
    coordinate's terms into residue classes mod ``N`` and convolving the
    classes cyclically. ``tail_sq`` bounds the squared mass left outside the
    box: it is the full (not dual-restricted) double sum beyond the box,
    computed from ``(1 + 2 gamma^2 zeta(2 alpha))^2`` per coordinate.
    """
    alpha = korobov.check_alpha(alpha)
    N, z = rule.n_points, rule.gen
    d = len(z)
    g = korobov.as_gamma(gamma, d)
    K = int(trunc_radius)
    if K < 1:
        raise ValueError("trunc_radius must be positive")
    if N > MAX_DIRECT_RESIDUES or K > MAX_DIRECT_RADIUS:
        raise ValueError(f"direct criterion infeasible for N={N}, radius={K}")
    m = np.arange(-K, K + 1, dtype=np.int64)
    dist = np.zeros(N)
    dist[0] = 1.0
    zero_term = 1.0
    full, trunc = 1.0, 1.0
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    for j in range(d):
        s = _pair_sums(alpha, g[j], K)
        zero_term *= s[K]
        trunc *= s.sum()
        full *= (1.0 + 2.0 * g[j] ** 2 * korobov.zeta(2 * alpha)) ** 2
        # mass of l_j mapped to residue l_j z_j mod N
        e = np.bincount((m % N) * z[j] % N, weights=s, minlength=N)
        dist = dist[idx] @ e
    value_sq = float(max(dist[0] - zero_term, 0.0))
    tail = float(max(full - trunc, 0.0))
    return DirectCriterion(math.sqrt(value_sq), value_sq, tail)


def criterion_direct_naive(rule: LatticeRule, alpha, gamma, trunc_radius: int) -> float:
    """Literal enumeration of ``R^2`` over the box; tiny instances only."""
    K = int(trunc_radius)
    d = rule.dim
    if (2 * K + 1) ** (2 * d) > 5_000_000:
        raise ValueError("naive criterion infeasible at this size")
    axis = np.arange(-K, K + 1)
    box = np.stack([a.ravel() for a in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)
    ells = box[np.any(box != 0, axis=1)]
    ells = ells[np.asarray(_dual_mask(rule, ells))]
    a_h = korobov.inv_r2_array(box, alpha, gamma)
    total = 0.0
    for ell in ells:
        total += float(np.sum(a_h * korobov.inv_r2_array(box + ell, alpha, gamma)))
    return total


def _dual_mask(rule, H):
    from .lattice import dot_mod

    return dot_mod(H, rule.gen, rule.n_points) == 0


# --------------------------------------------------------------------------
# criterion, closed form


def _factor_table(alpha, gj: float, N: int, series_terms: int) -> np.ndarray:
    """``1 + gamma_j^2 w(x / N)`` for residues ``x = 0..N-1``."""
    w, _ = korobov.decay_sum_on_grid(alpha, N, series_terms)
    return 1.0 + gj ** 2 * w


def _constant_term(alpha, g) -> float:
    z4 = korobov.zeta(4 * float(alpha))
    return float(np.prod(1.0 + 2.0 * z4 * np.asarray(g) ** 4))


def _clamp_sq(val: float) -> float:
    if val < 0.0:
        if val < NEG_CLAMP:
            raise FloatingPointError(f"criterion squared is {val:.3e}, below the clamp {NEG_CLAMP}")
        return 0.0
    return val


def criterion_formula_sq(rule: LatticeRule, alpha, gamma,
                         series_terms: int = korobov.DEFAULT_SERIES_TERMS) -> float:
    N, z = rule.n_points, rule.gen
    g = korobov.as_gamma(gamma, len(z))
    k = np.arange(N, dtype=np.int64)
    prod = np.ones(N, dtype=np.longdouble)
    for j, zj in enumerate(z):
        prod *= _factor_table(alpha, g[j], N, series_terms).astype(np.longdouble)[(k * zj) % N] ** 2
    return _clamp_sq(float(np.mean(prod) - np.longdouble(_constant_term(alpha, g))))


def criterion_formula(rule: LatticeRule, alpha, gamma,
                      series_terms: int = korobov.DEFAULT_SERIES_TERMS) -> float:
    """Closed-form criterion ``R`` from the lattice average of Bernoulli factors.

    Exact for ``alpha`` in {1, 2, 3}. Any other ``alpha > 1/2`` uses the
    truncated Fourier series of the one-dimensional factor with
    ``series_terms`` terms.
    """
    return math.sqrt(criterion_formula_sq(rule, alpha, gamma, series_terms))


# --------------------------------------------------------------------------
# candidate scoring


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def primitive_root(N: int) -> int:
    """Smallest generator of the multiplicative group mod the prime ``N``."""
    if not is_prime(N):
        raise ValueError(f"{N} is not prime")
    if N == 2:
        return 1
    factors = _prime_factors(N - 1)
    for g in range(2, N):
        if all(pow(g, (N - 1) // q, N) != 1 for q in factors):
            return g
    raise AssertionError("unreachable for prime N")


def _theta(N: int, z_prefix, alpha, g, series_terms) -> np.ndarray:
    k = np.arange(N, dtype=np.int64)
    theta = np.ones(N, dtype=np.longdouble)
    for j, zj in enumerate(z_prefix):
        theta *= _factor_table(alpha, g[j], N, series_terms).astype(np.longdouble)[(k * zj) % N] ** 2
    return theta


def _scores_naive(theta: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``sum_k theta_k (1 + b(k z))^2`` for every ``z = 1..N-1`` by direct accumulation."""
    N = theta.shape[0]
    k = np.arange(N, dtype=np.int64)
    out = np.empty(N - 1, dtype=np.longdouble)
    step = max(1, 4_000_000 // N)
    for start in range(1, N, step):
        zs = np.arange(start, min(N, start + step), dtype=np.int64)
        vals = (1.0 + b[(zs[:, None] * k[None, :]) % N]) ** 2
        out[start - 1:start - 1 + len(zs)] = vals @ theta
    return out


def _scores_fast(theta: np.ndarray, b: np.ndarray, root: int) -> np.ndarray:
    """Same sums in O(N log N): index ``k`` and ``z`` by powers of a primitive root.

    With ``k = g^a`` and ``z = g^c`` the sums over ``k != 0`` become the
    cyclic correlations ``sum_a theta(g^a) b(g^(a+c))`` (and likewise for
    ``b^2``) of length ``N - 1``.
    """
    N = theta.shape[0]
    n = N - 1
    powers = np.empty(n, dtype=np.int64)
    powers[0] = 1
    for i in range(1, n):
        powers[i] = powers[i - 1] * root % N
    u = theta[powers]
    U = np.conj(np.fft.fft(u))
    corr_b = np.fft.ifft(U * np.fft.fft(b[powers])).real
    corr_b2 = np.fft.ifft(U * np.fft.fft(b[powers] ** 2)).real
    base = theta[0] * (1.0 + b[0]) ** 2 + u.sum()
    by_exponent = base + 2.0 * corr_b + corr_b2
    out = np.empty(n, dtype=np.longdouble)
    out[powers - 1] = by_exponent
    return out


def candidate_scores(N: int, z_prefix, alpha, gamma, fast: bool = True,
                     series_terms: int = korobov.DEFAULT_SERIES_TERMS) -> np.ndarray:
    """Criterion ``R_{N,s}(z_prefix, z_s)`` for every ``z_s = 1..N-1``.

    Entry ``i`` of the result belongs to ``z_s = i + 1``. The fast path needs
    ``N`` prime; ``fast=False`` accumulates naively in O(N^2) and accepts
    any ``N >= 2``.
    """
    N = int(N)
    z_prefix = tuple(int(v) for v in z_prefix)
    s = len(z_prefix) + 1
    g = korobov.as_gamma(gamma, s)
    if N < 2:
        raise ValueError("N must be at least 2")
    if fast and not is_prime(N):
        raise ValueError(f"the fast scoring path needs prime N, got {N}")
    theta = _theta(N, z_prefix, alpha, g, series_terms)
    # long double accumulation: R^2 is a small difference of O(1) quantities
    b = _factor_table(alpha, g[s - 1], N, series_terms).astype(np.longdouble) - 1
    sums = _scores_fast(theta, b, primitive_root(N)) if fast else _scores_naive(theta, b)
    r2 = (sums / N - np.longdouble(_constant_term(alpha, g))).astype(float)
    if np.any(r2 < NEG_CLAMP):
        raise FloatingPointError(f"criterion squared reached {r2.min():.3e}")
    return np.sqrt(np.maximum(r2, 0.0))


# --------------------------------------------------------------------------
# candidate sets and the construction


def candidate_set_size(N: int, tau: float) -> int:
    """``ceil(tau (N - 1))``, robust to binary rounding of ``tau``."""
    return max(1, math.ceil(round(tau * (N - 1), 9)))


def select_candidate_set(scores, tau) -> np.ndarray:
    """The ``ceil(tau (N-1))`` best candidates, ordered by (score, value).

    ``scores[i]`` belongs to candidate ``i + 1``.
    """
    scores = np.asarray(scores, dtype=float)
    n = scores.shape[0]
    order = np.lexsort((np.arange(1, n + 1), scores))
    return (order[:candidate_set_size(n + 1, tau)] + 1).astype(np.int64)


def randomized_cbc(cfg: CbcConfig, series_terms: int = korobov.DEFAULT_SERIES_TERMS,
                   rng: np.random.Generator | None = None) -> CbcResult:
    """Draw ``N`` from the prime pool and build ``z`` component by component.

    Random draws come from one PCG64 stream seeded with ``cfg.seed`` (or the
    supplied ``rng``): one integer for the index of ``N`` in the sorted pool,
    then one integer per coordinate ``s = 2..d`` for the position in the
    ordered candidate set.
    """
    rng = make_rng(cfg.seed) if rng is None else rng
    pool = primes_in_range(cfg.M)
    N = pool[int(rng.integers(len(pool)))]
    g = np.asarray(cfg.gamma)
    z = [1]
    first = criterion_formula(LatticeRule(N, (1,)), cfg.alpha, g[:1], series_terms)
    scores, sizes, sets = [first], [1], [np.array([1])]
    for s in range(2, cfg.d + 1):
        sc = candidate_scores(N, z, cfg.alpha, g[:s], series_terms=series_terms)
        cand = select_candidate_set(sc, cfg.tau)
        pick = int(cand[int(rng.integers(len(cand)))])
        z.append(pick)
        scores.append(float(sc[pick - 1]))
        sizes.append(len(cand))
        sets.append(cand)
    return CbcResult(LatticeRule(N, tuple(z)), scores, sizes, cfg.seed, cfg.tau, sets)
