"""
Randomized lattice approximation and exact error accounting.

The operator samples ``f`` on a shifted rank-1 lattice, estimates every
Fourier coefficient ``h`` in a truncation set with

    f_hat_est(h) = (1/N) sum_k f({k z / N + shift}) exp(-2 pi i h.(k z / N + shift)),

and sums the estimated series. All estimates for one rule come from a single
length-``N`` DFT of the samples: ``h`` reads bin ``h.z mod N``.

For trigonometric polynomials the error is computed exactly. The coefficient
error of ``h`` only involves the frequencies ``g`` with ``g.z == h.z (mod N)``
(the aliases of ``h``), which is what the functions below exploit.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cbc import CbcConfig, make_rng, randomized_cbc
from .indexset import IndexSet, build_index_set, encode_pair
from .lattice import ShiftedLatticeRule, dot_mod
from .testfns import FourierPolynomial

__all__ = [
    "Approximant",
    "sample_function",
    "estimate_coeffs",
    "alias_expansion",
    "coefficient_errors",
    "exact_sq_error_fixed",
    "exact_expected_sq_error_given_rule",
    "approximate",
    "draw_shift",
    "rmse_monte_carlo",
    "monte_carlo_trials",
    "trial_seed",
]


@dataclass
class Approximant:
    """Estimated coefficients on an index set, plus how they were produced."""

    index_set: IndexSet
    coeffs: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (len(self.index_set),):
            raise ValueError("one coefficient per index-set member is required")

    def as_polynomial(self) -> FourierPolynomial:
        return FourierPolynomial(self.index_set.members, self.coeffs, dim=self.index_set.dim)

    def coefficient(self, h) -> complex:
        hit = self.index_set.contains(np.atleast_2d(h))[0]
        if not hit:
            return 0.0j
        row = np.flatnonzero(np.all(self.index_set.members == np.asarray(h), axis=1))[0]
        return complex(self.coeffs[row])

    def __call__(self, x):
        return self.as_polynomial()(x)

    def to_json(self) -> str:
        prov = {k: _plain(v) for k, v in self.provenance.items()}
        terms = [
            {"h": [int(v) for v in h], "re": float(c.real), "im": float(c.imag)}
            for h, c in zip(self.index_set.members, self.coeffs)
        ]
        return json.dumps({"dim": self.index_set.dim, "threshold": float(self.index_set.threshold),
                           "provenance": prov, "terms": terms})

    @classmethod
    def from_json(cls, text: str) -> "Approximant":
        obj = json.loads(text)
        dim = int(obj["dim"])
        H = np.array([t["h"] for t in obj["terms"]], dtype=np.int64).reshape(-1, dim)
        c = np.array([complex(t["re"], t["im"]) for t in obj["terms"]], dtype=complex)
        return cls(IndexSet(dim, float(obj.get("threshold", math.nan)), H), c, dict(obj.get("provenance", {})))


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (tuple, list, np.ndarray)):
        return [_plain(x) for x in v]
    return v


def _as_shifted(rule) -> ShiftedLatticeRule:
    return rule if isinstance(rule, ShiftedLatticeRule) else ShiftedLatticeRule.unshifted(rule)


def sample_function(f, rule) -> np.ndarray:
    """Values ``f({k z / N + shift})`` for ``k = 0..N-1``.

    ``f`` must accept an ``(N, d)`` array of points.
    """
    rule = _as_shifted(rule)
    return np.asarray(f(rule.points()), dtype=complex).reshape(rule.n_points)


def estimate_coeffs(samples, rule, A: IndexSet) -> Approximant:
    """Lattice estimates of the coefficients on ``A`` from one FFT of the samples."""
    rule = _as_shifted(rule)
    N = rule.n_points
    y = np.asarray(samples, dtype=complex)
    if y.shape != (N,):
        raise ValueError(f"expected {N} samples, got shape {y.shape}")
    spectrum = np.fft.fft(y) / N
    H = A.members
    if len(H) == 0:
        coeffs = np.zeros(0, dtype=complex)
    else:
        bins = dot_mod(H, rule.gen, N)
        coeffs = spectrum[bins] * np.exp(-2j * np.pi * _phase(H, rule.shift))
    prov = {"N": N, "z": list(rule.gen), "shift": list(rule.shift), "T": A.threshold}
    return Approximant(A, coeffs, prov)


def _phase(H: np.ndarray, shift) -> np.ndarray:
    # h . shift reduced mod 1 term by term to keep the argument small
    acc = np.zeros(H.shape[0])
    for j, s in enumerate(shift):
        t = H[:, j] * s
        acc += t - np.floor(t)
    return acc


def alias_expansion(f: FourierPolynomial, rule, h) -> complex:
    """Coefficient error ``f_hat(h) - f_hat_est(h)`` written over the aliases of ``h``.

    Equals ``-sum_{l in dual \\ {0}} f_hat(h + l) exp(2 pi i l.shift)``; the
    sum runs over the support of ``f`` with exact dual membership, so there
    is no truncation.
    """
    rule = _as_shifted(rule)
    h = np.asarray(h, dtype=np.int64)
    ells = f.indices - h[None, :]
    hit = (dot_mod(ells, rule.gen, rule.n_points) == 0) & np.any(ells != 0, axis=1)
    if not hit.any():
        return 0.0j
    terms = f.coeffs[hit] * np.exp(2j * np.pi * _phase(ells[hit], rule.shift))
    return complex(-np.sum(terms))


def coefficient_errors(f: FourierPolynomial, rule, H) -> np.ndarray:
    """``f_hat(h) - f_hat_est(h)`` for every row of ``H``, from alias-class sums."""
    rule = _as_shifted(rule)
    H = np.atleast_2d(np.asarray(H, dtype=np.int64))
    N = rule.n_points
    g_bins = dot_mod(f.indices, rule.gen, N)
    class_sums = np.zeros(N, dtype=complex)
    np.add.at(class_sums, g_bins, f.coeffs * np.exp(2j * np.pi * _phase(f.indices, rule.shift)))
    own = _lookup(f, H)
    est = np.exp(-2j * np.pi * _phase(H, rule.shift)) * class_sums[dot_mod(H, rule.gen, N)]
    return own - est


def _lookup(f: FourierPolynomial, H: np.ndarray) -> np.ndarray:
    """``f_hat`` at the rows of ``H`` (zero off the support)."""
    out = np.zeros(H.shape[0], dtype=complex)
    if len(f) == 0 or H.shape[0] == 0:
        return out
    keys, probe = encode_pair(f.indices, H)
    order = np.argsort(keys)
    pos = np.minimum(np.searchsorted(keys, probe, sorter=order), len(keys) - 1)
    hit = keys[order[pos]] == probe
    out[hit] = f.coeffs[order[pos[hit]]]
    return out


def exact_sq_error_fixed(f: FourierPolynomial, rule, A: IndexSet) -> float:
    """Squared L2 error of the approximation of ``f`` for one fixed shifted rule.

    By orthogonality: energy of ``f`` outside ``A`` plus the squared
    coefficient errors on ``A``.
    """
    rule = _as_shifted(rule)
    outside = ~A.contains(f.indices) if len(f) else np.zeros(0, dtype=bool)
    tail = float(np.sum(np.abs(f.coeffs[outside]) ** 2))
    if len(A) == 0:
        return tail
    err = coefficient_errors(f, rule, A.members)
    return tail + float(np.sum(np.abs(err) ** 2))


def exact_expected_sq_error_given_rule(f: FourierPolynomial, rule, A: IndexSet) -> float:
    """Squared error averaged over a uniform shift, for fixed ``(N, z)``.

    Energy outside ``A`` plus ``sum_{h in A} sum_{l in dual \\ {0}} |f_hat(h + l)|^2``;
    each support frequency ``g`` is counted once per other member of ``A``
    in its alias class.
    """
    rule = rule.rule if isinstance(rule, ShiftedLatticeRule) else rule
    N = rule.n_points
    if len(f) == 0:
        return 0.0
    mass = np.abs(f.coeffs) ** 2
    inside = A.contains(f.indices)
    total = float(np.sum(mass[~inside]))
    if len(A):
        counts = np.bincount(dot_mod(A.members, rule.gen, N), minlength=N)
        multiplicity = counts[dot_mod(f.indices, rule.gen, N)] - inside.astype(np.int64)
        total += float(np.sum(mass * multiplicity))
    return total


def draw_shift(rng: np.random.Generator, d: int) -> tuple:
    return tuple(float(v) for v in rng.random(d))


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    """Seed sequence of one Monte Carlo trial; independent of how many trials run."""
    return np.random.SeedSequence(int(seed), spawn_key=(int(trial),))


# child key of the shift stream; trial keys stay below it
SHIFT_STREAM = 2**32


def _shift_rng(seq: np.random.SeedSequence) -> np.random.Generator:
    return make_rng(np.random.SeedSequence(seq.entropy, spawn_key=tuple(seq.spawn_key) + (SHIFT_STREAM,)))


def approximate(f, cfg: CbcConfig, T, A: IndexSet | None = None, seed_seq=None) -> Approximant:
    """Run the randomized construction, draw a shift, sample ``f`` and estimate.

    The construction consumes the stream seeded by ``cfg.seed`` exactly as
    :func:`randomized_cbc` does, so ``(N, z)`` agree with a bare construction
    run with the same seed; the shift comes from a separate child stream.
    """
    seq = np.random.SeedSequence(cfg.seed) if seed_seq is None else seed_seq
    res = randomized_cbc(cfg, rng=make_rng(seq))
    shift = draw_shift(_shift_rng(seq), cfg.d)
    rule = ShiftedLatticeRule(res.rule, shift)
    if A is None:
        A = build_index_set(cfg.d, cfg.alpha, cfg.gamma, T)
    approx = estimate_coeffs(sample_function(f, rule), rule, A)
    approx.provenance.update({"seed": cfg.seed, "M": cfg.M, "tau": cfg.tau,
                              "alpha": cfg.alpha, "gamma": list(cfg.gamma)})
    return approx


def _draw_rule(cfg: CbcConfig, trial: int) -> ShiftedLatticeRule:
    seq = trial_seed(cfg.seed, trial)
    res = randomized_cbc(cfg, rng=make_rng(seq))
    return ShiftedLatticeRule(res.rule, draw_shift(_shift_rng(seq), cfg.d))


def monte_carlo_trials(f: FourierPolynomial, cfg: CbcConfig, A: IndexSet, n_trials: int,
                       threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Exact squared errors and drawn ``N`` of trials ``0..n_trials-1``."""
    def one(i):
        rule = _draw_rule(cfg, i)
        return exact_sq_error_fixed(f, rule, A), rule.n_points

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(one, range(n_trials)))
    else:
        out = [one(i) for i in range(n_trials)]
    errs = np.array([e for e, _ in out], dtype=float)
    ns = np.array([n for _, n in out], dtype=np.int64)
    return errs, ns


def rmse_monte_carlo(f: FourierPolynomial, cfg: CbcConfig, T, n_trials: int,
                     A: IndexSet | None = None, threads: int = 1,
                     return_samples: bool = False):
    """Mean squared error over independent ``(N, z, shift)`` draws, with its standard error.

    Trial ``i`` is seeded by ``SeedSequence(cfg.seed, spawn_key=(i,))`` so a
    longer run extends a shorter one, whatever the thread count.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    if A is None:
        A = build_index_set(cfg.d, cfg.alpha, cfg.gamma, T)
    errs, _ = monte_carlo_trials(f, cfg, A, n_trials, threads)
    mean = float(errs.mean())
    stderr = float(errs.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    return (mean, stderr, errs) if return_samples else (mean, stderr)
