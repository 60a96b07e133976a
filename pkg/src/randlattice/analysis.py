"""
Bounds, exhaustive enumerations and the convergence experiment.

The upper bounds are stated for every ``lambda`` in ``(1/2, alpha)``;
minimizing over a finite grid gives a value at least the true infimum, so
every check made against a grid bound is sound.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats

from . import korobov
from .approx import exact_expected_sq_error_given_rule, monte_carlo_trials
from .cbc import CbcConfig, candidate_scores, select_candidate_set
from .indexset import IndexSet, build_index_set, corollary_T
from .lattice import LatticeRule, dot_mod, is_prime, primes_in_range
from .testfns import FourierPolynomial, fooling_function

__all__ = [
    "BoundReport",
    "OmegaTable",
    "ConvergenceResult",
    "default_lambda_grid",
    "h_m",
    "min_required_m",
    "theorem3_bound",
    "rate_exponent",
    "bound_report",
    "enumerate_rules_d2",
    "omega_bruteforce",
    "omega_vanishing_check",
    "pair_sum",
    "omega_table",
    "fit_omega_constant",
    "rmse_lower_bound",
    "mse_lower_bound",
    "enumerated_expected_sq_error",
    "fooling_witness",
    "verify_fooling_lemma",
    "corollary_T",
    "convergence_experiment",
    "write_csv",
]

OMEGA_RADIUS = 1000
MAX_ENUM_M = 5000


# --------------------------------------------------------------------------
# upper bounds


def default_lambda_grid(alpha, n: int = 64) -> np.ndarray:
    """``n`` log-spaced points in ``(1/2 + 1e-3, alpha - 1e-3)``."""
    alpha = korobov.check_alpha(alpha)
    lo, hi = 0.5 + 1e-3, alpha - 1e-3
    if hi <= lo:
        return np.array([(0.5 + alpha) / 2.0])
    return np.geomspace(lo, hi, n)


def _grid(alpha, lambda_grid) -> np.ndarray:
    alpha = korobov.check_alpha(alpha)
    grid = default_lambda_grid(alpha) if lambda_grid is None else np.atleast_1d(np.asarray(lambda_grid, float))
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    if np.any(grid <= 0.5) or np.any(grid >= alpha):
        raise ValueError(f"lambda grid must lie inside (0.5, {alpha})")
    return grid


def _log_weight_product(lam: float, alpha: float, g: np.ndarray) -> float:
    """``2 sum_j log(1 + 2^(2 alpha + 2) gamma_j^(1/lam) zeta(alpha/lam))``."""
    z = korobov.zeta(alpha / lam)
    c = 2.0 ** (2.0 * alpha + 2.0)
    return 2.0 * float(np.sum(np.log1p(c * g ** (1.0 / lam) * z)))


def _log_brackets(log_front: float, alpha, g, grid) -> np.ndarray:
    return np.array([log_front + _log_weight_product(lam, alpha, g) for lam in grid])


def h_m(M, alpha, gamma, tau, lambda_grid=None) -> float:
    """Grid minimum of ``[2 / ((1 - tau) M) prod_j (1 + 2^(2a+2) g_j^(1/l) zeta(a/l))^2]^l``.

    Upper bound for the infimum over ``lambda``; caps the criterion of
    every constructed vector with ``N`` drawn for this ``M``.
    """
    alpha = korobov.check_alpha(alpha)
    grid = _grid(alpha, lambda_grid)
    g = np.asarray(korobov.as_gamma(gamma, len(np.atleast_1d(gamma))), dtype=float)
    logs = _log_brackets(math.log(2.0 / ((1.0 - tau) * M)), alpha, g, grid)
    return float(np.min(np.exp(grid * logs)))


def min_required_m(alpha, gamma, tau, d: int | None = None, lambda_grid=None) -> float:
    """Grid minimum of ``(2 / (1 - tau)) prod_j (...)^2``; ``M`` at least this gives ``h_m <= 1``."""
    alpha = korobov.check_alpha(alpha)
    grid = _grid(alpha, lambda_grid)
    d = len(np.atleast_1d(gamma)) if d is None else d
    g = np.asarray(korobov.as_gamma(gamma, d), dtype=float)
    logs = _log_brackets(math.log(2.0 / (1.0 - tau)), alpha, g, grid)
    return float(np.exp(np.min(logs)))


def theorem3_bound(N: int, s: int, alpha, gamma, tau, lambda_grid=None) -> float:
    """Grid-minimized cap on the criterion after step ``s`` of the construction."""
    if N < 3:
        raise ValueError("N must be at least 3")
    alpha = korobov.check_alpha(alpha)
    grid = _grid(alpha, lambda_grid)
    g = np.asarray(korobov.as_gamma(gamma, s), dtype=float)
    logs = _log_brackets(-math.log((1.0 - tau) * (N - 1)), alpha, g, grid)
    return float(np.min(np.exp(grid * logs)))


def rate_exponent(lam, beta, alpha) -> float:
    """Exponent of ``M`` in the RMSE upper bound: ``-(lam/2 - lam beta/(4 alpha) + 1/8)``."""
    return -(lam / 2.0 - lam * beta / (4.0 * alpha) + 0.125)


@dataclass
class BoundReport:
    M: int
    d: int
    alpha: float
    gamma: tuple
    tau: float
    lambda_grid: list
    H_M: float
    min_required_M: float
    theorem3_bounds: list
    rate_exponent: float | None = None

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, (tuple, list)) else v) for k, v in self.__dict__.items()}


def bound_report(M, d, alpha, gamma, tau, lambda_grid=None, N=None, lam=None, beta=None) -> BoundReport:
    """Collect the bound quantities for one parameter set.

    Per-step bounds use ``N`` if given, else the smallest prime in the pool
    (the weakest case).
    """
    grid = _grid(alpha, lambda_grid)
    g = korobov.as_gamma(gamma, d)
    N = min(primes_in_range(M)) if N is None else N
    return BoundReport(
        M=int(M), d=int(d), alpha=float(alpha), gamma=tuple(float(v) for v in g), tau=float(tau),
        lambda_grid=[float(v) for v in grid],
        H_M=h_m(M, alpha, g, tau, grid),
        min_required_M=min_required_m(alpha, g, tau, d, grid),
        theorem3_bounds=[theorem3_bound(N, s, alpha, g, tau, grid) for s in range(1, d + 1)],
        rate_exponent=None if lam is None else rate_exponent(lam, beta, alpha),
    )


# --------------------------------------------------------------------------
# exhaustive enumeration in two dimensions


@lru_cache(maxsize=64)
def _rules_d2(M: int, tau: float, alpha: float, gamma: tuple) -> tuple:
    out = []
    for N in primes_in_range(M):
        sc = candidate_scores(N, [1], alpha, gamma)
        out.append((N, select_candidate_set(sc, tau)))
    return tuple(out)


def enumerate_rules_d2(M, tau, alpha, gamma):
    """Every ``(N, z)`` the two-dimensional construction can output, with its probability.

    Yields ``(N, z, weight)`` where ``weight = 1 / (|pool| |Z_N|)``.
    """
    if M > MAX_ENUM_M:
        raise ValueError(f"exhaustive enumeration limited to M <= {MAX_ENUM_M}")
    alpha = korobov.check_alpha(alpha)
    g = tuple(float(v) for v in korobov.as_gamma(gamma, 2))
    rules = _rules_d2(int(M), float(tau), alpha, g)
    for N, cand in rules:
        w = 1.0 / (len(rules) * len(cand))
        for z2 in cand:
            yield N, (1, int(z2)), w


def _omega_many(M, tau, alpha, gamma, L: np.ndarray) -> np.ndarray:
    L = np.atleast_2d(np.asarray(L, dtype=np.int64))
    if L.shape[1] != 2:
        raise ValueError("omega is enumerated in two dimensions only")
    if M > MAX_ENUM_M:
        raise ValueError(f"exhaustive enumeration limited to M <= {MAX_ENUM_M}")
    g = tuple(float(v) for v in korobov.as_gamma(gamma, 2))
    rules = _rules_d2(int(M), float(tau), korobov.check_alpha(alpha), g)
    omega = np.zeros(L.shape[0])
    for N, cand in rules:
        # l1 + l2 z2 == 0 (mod N) for each candidate z2
        hits = ((L[:, 0, None] % N) + (L[:, 1, None] % N) * cand[None, :]) % N == 0
        omega += hits.mean(axis=1) / len(rules)
    return omega


def omega_bruteforce(M, tau, alpha, gamma, ell) -> float:
    """Probability over the construction that ``ell`` lies in the dual lattice."""
    return float(_omega_many(M, tau, alpha, gamma, np.asarray(ell)[None, :])[0])


def _coord_pair_sums(alpha, gj: float, ells: np.ndarray, K: int) -> np.ndarray:
    h = np.arange(-K, K + 1, dtype=np.int64)
    rho = korobov.inv_r2_array(h[:, None], alpha, (gj,))
    out = np.empty(len(ells))
    for i, l in enumerate(ells):
        out[i] = float(rho @ korobov.inv_r2_array((h + l)[:, None], alpha, (gj,)))
    return out


def pair_sum(alpha, gamma, ell, K: int = OMEGA_RADIUS) -> tuple[float, float]:
    """``sum_h 1 / (r^2(h) r^2(h + ell))`` truncated to ``|h_j| <= K``, and an upper bound.

    The sum factorizes over coordinates. The truncated value is a lower
    bound (all terms are positive); the second value adds the per-coordinate
    tail ``2 g^2 K^(1 - 2 alpha) / (2 alpha - 1)``.
    """
    alpha = korobov.check_alpha(alpha)
    ell = np.asarray(ell, dtype=np.int64)
    g = korobov.as_gamma(gamma, len(ell))
    lo, hi = 1.0, 1.0
    for j, l in enumerate(ell):
        s = _coord_pair_sums(alpha, g[j], np.array([l]), K)[0]
        lo *= s
        hi *= s + 2.0 * g[j] ** 2 * K ** (1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0)
    return lo, hi


def omega_vanishing_check(M, tau, alpha, gamma, ell, lambda_grid=None, K: int = OMEGA_RADIUS) -> bool:
    """True when the pair sum of ``ell`` already exceeds ``H_M^2``, which forces ``omega(ell) = 0``.

    ``ell = 0`` is never flagged: it lies in every dual lattice.
    """
    if not np.any(np.asarray(ell)):
        return False
    lo, _ = pair_sum(alpha, gamma, ell, K)
    return bool(lo > h_m(M, alpha, gamma, tau, lambda_grid) ** 2)


@dataclass
class OmegaTable:
    M: int
    tau: float
    alpha: float
    gamma: tuple
    ells: np.ndarray
    omega: np.ndarray
    flagged: np.ndarray
    d: int = 2

    def rows(self):
        for l, w, f in zip(self.ells, self.omega, self.flagged):
            yield {"l1": int(l[0]), "l2": int(l[1]), "omega": float(w), "flagged_vanishing": bool(f)}

    def counterexamples(self) -> np.ndarray:
        """Indices ``ell`` flagged as vanishing but with positive probability."""
        return self.ells[self.flagged & (self.omega > 0)]

    def lookup(self, ell) -> float:
        hit = np.all(self.ells == np.asarray(ell), axis=1)
        if not hit.any():
            raise KeyError(tuple(ell))
        return float(self.omega[hit][0])


def omega_table(M, tau, alpha, gamma, radius: int = 30, lambda_grid=None, K: int = OMEGA_RADIUS) -> OmegaTable:
    """``omega`` and the vanishing flag for every ``ell`` with ``|ell_j| <= radius``."""
    alpha = korobov.check_alpha(alpha)
    g = korobov.as_gamma(gamma, 2)
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    L = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    omega = _omega_many(M, tau, alpha, g, L)
    s1 = _coord_pair_sums(alpha, g[0], axis, K)
    s2 = _coord_pair_sums(alpha, g[1], axis, K)
    S = np.outer(s1, s2).ravel()
    flagged = (S > h_m(M, alpha, g, tau, lambda_grid) ** 2) & np.any(L != 0, axis=1)
    return OmegaTable(int(M), float(tau), alpha, tuple(g), L, omega, flagged)


def fit_omega_constant(table: OmegaTable) -> float:
    """Smallest ``c`` with ``omega(ell) <= c log(1 + |ell|_inf) / (tau M)`` on the table.

    Fitted from data for display only; no correctness claim is attached.
    """
    norm = np.max(np.abs(table.ells), axis=1)
    keep = norm > 0
    ratio = table.omega[keep] * table.tau * table.M / np.log1p(norm[keep])
    return float(ratio.max()) if ratio.size else 0.0


# --------------------------------------------------------------------------
# lower bound


def rmse_lower_bound(M, alpha, gamma) -> float:
    """``sqrt(2) min(gamma_1, gamma_2) / (3 M^(alpha/2 + 1/2))``."""
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if g.size < 2:
        raise ValueError("the lower bound needs d >= 2")
    if M < 4:
        raise ValueError("the lower bound needs M >= 4")
    alpha = korobov.check_alpha(alpha)
    return math.sqrt(2.0) * float(min(g[0], g[1])) / (3.0 * float(M) ** (alpha / 2.0 + 0.5))


def mse_lower_bound(M, alpha, gamma) -> float:
    """Squared form ``2 min(gamma_1^2, gamma_2^2) / (9 M^(alpha + 1))``."""
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if g.size < 2:
        raise ValueError("the lower bound needs d >= 2")
    return 2.0 * float(min(g[0] ** 2, g[1] ** 2)) / (9.0 * float(M) ** (korobov.check_alpha(alpha) + 1.0))


def enumerated_expected_sq_error(f: FourierPolynomial, M, tau, alpha, gamma, A: IndexSet,
                                 per_rule: bool = False):
    """Exact expected squared error over every ``(N, z)`` and the uniform shift (``d = 2``)."""
    total, rows = 0.0, []
    for N, z, w in enumerate_rules_d2(M, tau, alpha, gamma):
        e = exact_expected_sq_error_given_rule(f, LatticeRule(N, z), A)
        total += w * e
        rows.append((N, z, w, e))
    return (total, rows) if per_rule else total


def fooling_witness(N: int, z) -> tuple[int, int] | None:
    """Some ``h`` with ``h.z == 0 (mod N)``, ``0 < |h_j| <= floor(sqrt(N))``, or None."""
    K = math.isqrt(int(N))
    h = np.arange(K, -K - 1, -1, dtype=np.int64)
    h = h[h != 0]
    H1, H2 = np.meshgrid(h, h, indexing="ij")
    H = np.stack([H1.ravel(), H2.ravel()], axis=1)
    hit = np.flatnonzero(dot_mod(H, z, N) == 0)
    return None if hit.size == 0 else (int(H[hit[0], 0]), int(H[hit[0], 1]))


def verify_fooling_lemma(N: int, d: int = 2) -> bool:
    """Every ``z`` in ``{1..N-1}^2`` has a dual witness with both coordinates nonzero and at most ``sqrt(N)``."""
    if d != 2:
        raise ValueError("checked in two dimensions only")
    if not is_prime(N):
        raise ValueError(f"N must be prime, got {N}")
    K = math.isqrt(N)
    h = np.concatenate([np.arange(-K, 0), np.arange(1, K + 1)])
    zs = np.arange(1, N)
    # reach[z, r]: some admissible h has h z == r (mod N)
    reach = np.zeros((N - 1, N), dtype=np.int64)
    rows = np.repeat(np.arange(N - 1), len(h))
    reach[rows, (np.outer(zs, h) % N).ravel()] = 1
    # need h1 z1 == -(h2 z2); the reachable set is symmetric under negation
    return bool(np.all(reach @ reach.T > 0))


# --------------------------------------------------------------------------
# convergence experiment


@dataclass
class ConvergenceResult:
    rows: list
    slope: float
    slope_ci: tuple
    intercept: float
    fitted_constant: float
    target_exponent: float
    notes: dict = field(default_factory=dict)


def convergence_experiment(f: FourierPolynomial, M_list, d: int, alpha, gamma, tau, seed: int,
                           n_trials: int, lam: float = 0.9, beta: float = 0.05,
                           threads: int = 1, cap: int = 10**7) -> ConvergenceResult:
    """Mean squared error of ``f`` per ``M`` with ``T`` from :func:`corollary_T`, and a log-log fit.

    The fitted slope is of log RMSE against log M; the intercept gives a
    constant that is fitted, not proven. The ``lower_bound`` column is the
    squared worst-case lower bound, on the same scale as ``mse_mean``.
    """
    rows = []
    for M in M_list:
        cfg = CbcConfig(M, d, alpha, gamma, tau, seed)
        T = corollary_T(M, alpha, lam, beta)
        A = build_index_set(d, alpha, gamma, T, cap=cap)
        errs, ns = monte_carlo_trials(f, cfg, A, n_trials, threads)
        stderr = float(errs.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
        lb = mse_lower_bound(M, alpha, gamma) if d >= 2 else float("nan")
        rows.append({"M": int(M), "N_drawn_mean": float(ns.mean()), "T": float(T),
                     "mse_mean": float(errs.mean()), "mse_stderr": stderr, "lower_bound": lb})
    x = np.log([r["M"] for r in rows])
    y = 0.5 * np.log([r["mse_mean"] for r in rows])
    if len(rows) >= 3:
        fit = stats.linregress(x, y)
        half = stats.t.ppf(0.975, len(rows) - 2) * fit.stderr
        slope, intercept, ci = float(fit.slope), float(fit.intercept), (fit.slope - half, fit.slope + half)
    elif len(rows) == 2:
        slope = float((y[1] - y[0]) / (x[1] - x[0]))
        intercept = float(y[0] - slope * x[0])
        ci = (math.nan, math.nan)
    else:
        raise ValueError("need at least two values of M")
    target = -korobov.check_alpha(alpha) / 2.0 - 0.125
    return ConvergenceResult(rows, slope, (float(ci[0]), float(ci[1])), intercept,
                             math.exp(intercept), target, {"lambda": lam, "beta": beta, "n_trials": n_trials})


CONVERGENCE_COLUMNS = ["M", "N_drawn_mean", "T", "mse_mean", "mse_stderr", "lower_bound"]
OMEGA_COLUMNS = ["l1", "l2", "omega", "flagged_vanishing"]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".15g")


def write_csv(stream, columns, rows) -> None:
    """CSV with LF endings and at least 12 significant digits for reals."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
