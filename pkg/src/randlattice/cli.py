"""Command-line entry point: ``randlattice <command> [options]``.

Exit codes: 0 ok, 1 invariant violation, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import analysis, approx, cbc, korobov, lattice
from .indexset import build_index_set, corollary_T
from .testfns import FourierPolynomial, KernelFunction, kernel_truncation, random_unit_norm_poly

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "RANDLATTICE_THREADS"


class UsageError(Exception):
    pass


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _fmt(x: float) -> str:
    return format(float(x), ".15g")


def resolve_threads(flag: int | None) -> int:
    """Flag first, then the environment, then the machine's core count."""
    if flag is not None:
        return max(1, flag)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _gamma_for(args, d: int) -> tuple:
    g = args.gamma
    if len(g) == 1 and d > 1:
        g = g * d
    if len(g) < d:
        raise UsageError(f"--gamma has {len(g)} entries, need {d}")
    return g[:d]


def _config(args, d: int) -> cbc.CbcConfig:
    try:
        return cbc.CbcConfig(args.M, d, args.alpha, _gamma_for(args, d), args.tau, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_construct(args) -> int:
    cfg = _config(args, args.d)
    res = cbc.randomized_cbc(cfg)
    out = res.to_dict()
    N = res.rule.n_points
    bounds = [analysis.theorem3_bound(N, s, cfg.alpha, cfg.gamma, cfg.tau) for s in range(1, cfg.d + 1)]
    out["bounds"] = bounds
    out["bound_margins"] = [b - r for b, r in zip(bounds, out["scores"])]
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_VIOLATION if any(m < 0 for m in out["bound_margins"]) else EXIT_OK


def _load_function(args):
    if args.fn:
        try:
            with open(args.fn, encoding="utf-8") as fh:
                f = FourierPolynomial.from_json(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.fn}: {exc.strerror}") from None
        except (ValueError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot parse {args.fn}: {exc}") from None
        if args.d is not None and args.d != f.dim:
            raise UsageError(f"--d {args.d} does not match the function dimension {f.dim}")
        return f, f.dim
    if args.d is None:
        raise UsageError("--d is required with --kernel or --kernel-radius")
    g = _gamma_for(args, args.d)
    if args.kernel_radius is not None:
        return kernel_truncation(args.d, args.alpha, g, args.kernel_radius), args.d
    try:
        return KernelFunction(int(args.alpha), g, args.d), args.d
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _threshold(args) -> float:
    if args.T is not None:
        if args.lam is not None or args.beta is not None:
            raise UsageError("give either --T or --lambda/--beta, not both")
        if not args.T > 0:
            raise UsageError("--T must be positive")
        return args.T
    if args.lam is None or args.beta is None:
        raise UsageError("give --T, or both --lambda and --beta")
    try:
        return corollary_T(args.M, args.alpha, args.lam, args.beta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_approximate(args) -> int:
    f, d = _load_function(args)
    cfg = _config(args, d)
    T = _threshold(args)
    try:
        A = build_index_set(d, cfg.alpha, cfg.gamma, T)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = approx.approximate(f, cfg, T, A=A)
    obj = json.loads(result.to_json())
    if args.exact_error:
        if not isinstance(f, FourierPolynomial):
            raise UsageError("--exact-error needs a finite-support function (--fn or --kernel-radius)")
        N, z, shift = result.provenance["N"], result.provenance["z"], result.provenance["shift"]
        rule = lattice.ShiftedLatticeRule(lattice.LatticeRule(N, z), shift)
        obj["exact_sq_error"] = approx.exact_sq_error_fixed(f, rule, A)
    _emit(json.dumps(obj) + "\n", args.out)
    return EXIT_OK


def _parse_points(text: str, d: int) -> np.ndarray:
    rows = [r for r in text.replace("\n", ";").split(";") if r.strip()]
    try:
        X = np.array([[float(v) for v in r.split(",")] for r in rows])
    except ValueError:
        raise UsageError("points must be ';'-separated rows of ','-separated numbers") from None
    if X.ndim != 2 or X.shape[1] != d:
        raise UsageError(f"each point needs {d} coordinates")
    return X


def cmd_evaluate(args) -> int:
    try:
        with open(args.approximant, encoding="utf-8") as fh:
            a = approx.Approximant.from_json(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {args.approximant}: {exc.strerror}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse {args.approximant}: {exc!r}") from None
    text = args.points
    if args.points_file:
        with open(args.points_file, encoding="utf-8") as fh:
            text = fh.read()
    if not text:
        raise UsageError("give --points or --points-file")
    X = _parse_points(text, a.index_set.dim)
    vals = np.atleast_1d(a.as_polynomial()(X)) if len(a.index_set) else np.zeros(len(X), complex)
    lines = ["x,re,im"] + [
        f'"{",".join(_fmt(v) for v in x)}",{_fmt(y.real)},{_fmt(y.imag)}' for x, y in zip(X, vals)
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_convergence(args) -> int:
    d = args.d
    g = _gamma_for(args, d)
    if args.fn:
        f, _ = _load_function(args)
    else:
        f = kernel_truncation(d, args.alpha, g, args.radius)
    try:
        res = analysis.convergence_experiment(
            f, args.M_list, d, args.alpha, g, args.tau, args.seed, args.trials,
            lam=args.lam, beta=args.beta, threads=resolve_threads(args.threads))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            analysis.write_csv(fh, analysis.CONVERGENCE_COLUMNS, res.rows)
    else:
        analysis.write_csv(sys.stdout, analysis.CONVERGENCE_COLUMNS, res.rows)
    lo, hi = res.slope_ci
    print(f"slope {_fmt(res.slope)} (95% CI {_fmt(lo)} .. {_fmt(hi)}); "
          f"reference exponent {_fmt(res.target_exponent)}; "
          f"fitted constant {_fmt(res.fitted_constant)} (fitted, not proven)", file=sys.stderr)
    return EXIT_OK


def cmd_omega(args) -> int:
    try:
        tab = analysis.omega_table(args.M, args.tau, args.alpha, args.gamma, radius=args.radius)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = list(tab.rows())
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            analysis.write_csv(fh, analysis.OMEGA_COLUMNS, rows)
    else:
        analysis.write_csv(sys.stdout, analysis.OMEGA_COLUMNS, rows)
    bad = tab.counterexamples()
    print(f"flagged {int(tab.flagged.sum())}, counterexamples {len(bad)}, "
          f"fitted c {_fmt(analysis.fit_omega_constant(tab))} (fitted, not proven)", file=sys.stderr)
    return EXIT_VIOLATION if len(bad) else EXIT_OK


def cmd_lowerbound(args) -> int:
    try:
        value = analysis.rmse_lower_bound(args.M, args.alpha, args.gamma)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(_fmt(value))
    if not args.verify:
        return EXIT_OK
    from .testfns import fooling_function

    f = fooling_function(args.M, 2, args.alpha, args.gamma)
    A = build_index_set(2, args.alpha, args.gamma[:2], args.T if args.T else args.M)
    total, rows = analysis.enumerated_expected_sq_error(f, args.M, args.tau, args.alpha, args.gamma[:2], A,
                                                        per_rule=True)
    floor = analysis.mse_lower_bound(args.M, args.alpha, args.gamma)
    worst = min(r[3] for r in rows)
    print(f"enumerated rmse {_fmt(math.sqrt(total))}, smallest per-rule mse {_fmt(worst)}, "
          f"mse floor {_fmt(floor)}", file=sys.stderr)
    return EXIT_OK if worst >= floor else EXIT_VIOLATION


def selftest_checks(seed: int = 0):
    """Small oracle battery; yields ``(name, passed, detail)``."""
    rng = np.random.default_rng(seed)

    worst = 0.0
    for _ in range(200):
        N = int(rng.integers(2, 102))
        d = int(rng.integers(1, 5))
        rule = lattice.LatticeRule(N, rng.integers(1, N, d))
        h = rng.integers(-3 * N, 3 * N, d)
        worst = max(worst, abs(lattice.character_sum(rule, h) - float(lattice.dual_contains(rule, h))))
    yield "character property", worst <= 1e-9, worst

    worst = 0.0
    for N in (5, 7, 11, 13):
        for alpha in (1, 2):
            g = rng.uniform(0.1, 1.0, 2)
            rule = lattice.LatticeRule(N, (1, int(rng.integers(1, N))))
            direct = cbc.criterion_direct(rule, alpha, g, 1000)
            gap = abs(cbc.criterion_formula_sq(rule, alpha, g) - direct.value_sq) - direct.tail_sq
            worst = max(worst, gap)
    yield "criterion equivalence", worst <= 1e-6, worst

    worst = 0.0
    for N in (7, 31, 127):
        g = rng.uniform(0.1, 1.0, 3)
        fast = cbc.candidate_scores(N, [1, 3], 1, g, fast=True)
        slow = cbc.candidate_scores(N, [1, 3], 1, g, fast=False)
        worst = max(worst, float(np.max(np.abs(fast - slow) / np.abs(slow))))
    yield "fast candidate scores", worst <= 1e-9, worst

    bad = 0
    for k in range(12):
        cfg = cbc.CbcConfig((20, 50, 200)[k % 3], 1 + k % 4, 1, tuple(rng.uniform(0.1, 1, 4)),
                            (0.25, 0.5, 0.9)[k % 3], k)
        res = cbc.randomized_cbc(cfg)
        for s, R in enumerate(res.per_step_scores, 1):
            bad += R > analysis.theorem3_bound(res.rule.n_points, s, cfg.alpha, cfg.gamma, cfg.tau)
    yield "construction bound", bad == 0, bad

    worst = 0.0
    for _ in range(20):
        N = int(rng.choice([7, 11, 31]))
        rule = lattice.ShiftedLatticeRule(lattice.LatticeRule(N, (1, int(rng.integers(1, N)))), rng.random(2))
        f = FourierPolynomial(rng.integers(-40, 41, (30, 2)), rng.standard_normal(30) + 1j * rng.standard_normal(30))
        A = build_index_set(2, 1, (1, 1), 20)
        est = approx.estimate_coeffs(approx.sample_function(f, rule), rule, A)
        for h, c in zip(A.members, est.coeffs):
            worst = max(worst, abs((f.coefficient(h) - c) - approx.alias_expansion(f, rule, h)))
    yield "aliasing identity", worst <= 1e-10, worst

    bad = 0
    for M in (10, 20):
        bad += len(analysis.omega_table(M, 0.5, 1, (1, 1), radius=30).counterexamples())
    yield "vanishing frequencies", bad == 0, bad

    primes = [p for p in range(3, 102) if lattice.is_prime(p)]
    failed = [p for p in primes if not analysis.verify_fooling_lemma(p)]
    yield "fooling lemma", not failed, failed

    bad = 0
    from .testfns import fooling_function
    for M in (4, 10, 20):
        for alpha in (1, 2):
            f = fooling_function(M, 2, alpha, (1, 1))
            A = build_index_set(2, alpha, (1, 1), M)
            _, rows = analysis.enumerated_expected_sq_error(f, M, 0.5, alpha, (1, 1), A, per_rule=True)
            bad += sum(r[3] < analysis.mse_lower_bound(M, alpha, (1, 1)) for r in rows)
    yield "lower bound", bad == 0, bad

    f = random_unit_norm_poly(seed, build_index_set(2, 1, (1, 0.5), 30), 1, (1, 0.5))
    cfg = cbc.CbcConfig(64, 2, 1, (1, 0.5), 0.5, seed)
    a = approx.approximate(f, cfg, 16.0)
    b = approx.approximate(f, cfg, 16.0)
    yield "determinism", a.to_json() == b.to_json(), ""


def cmd_selftest(args) -> int:
    ok = True
    for name, passed, detail in selftest_checks(args.seed):
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
    return EXIT_OK if ok else EXIT_VIOLATION


# --------------------------------------------------------------------------
# parser


def _add_cbc(p, d_required=True):
    p.add_argument("--M", type=int, required=True, help="sample budget; N is drawn from primes in (M/2, M]")
    p.add_argument("--d", type=int, required=d_required, default=None, help="dimension")
    p.add_argument("--alpha", type=float, required=True, help="smoothness, > 1/2")
    p.add_argument("--gamma", type=_floats, required=True, help="weights, comma separated (one value repeats)")
    p.add_argument("--tau", type=float, default=0.5, help="candidate fraction in (0, 1)")
    p.add_argument("--seed", type=int, required=True, help="explicit RNG seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randlattice", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (env {THREADS_ENV}; default: all cores); never changes results")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="randomized component-by-component construction")
    _add_cbc(p)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("approximate", help="approximate a function from lattice samples")
    _add_cbc(p, d_required=False)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fn", help="FourierPolynomial JSON file")
    src.add_argument("--kernel", action="store_true", help="closed-form kernel x -> K(x, 0) (integer alpha)")
    src.add_argument("--kernel-radius", type=int, help="kernel coefficients truncated to a box, unit norm")
    p.add_argument("--T", type=float, help="index-set threshold")
    p.add_argument("--lambda", dest="lam", type=float, help="choose T from lambda and beta")
    p.add_argument("--beta", type=float)
    p.add_argument("--exact-error", action="store_true", help="also report the exact squared L2 error")
    p.add_argument("--out")
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("evaluate", help="evaluate a stored approximant")
    p.add_argument("--approximant", required=True)
    p.add_argument("--points", help="points as 'x1,x2;y1,y2;...'")
    p.add_argument("--points-file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("convergence", help="mean squared error against M, CSV")
    p.add_argument("--M-list", type=_ints, default=(64, 128, 256, 512, 1024, 2048, 4096))
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--gamma", type=_floats, default=(1.0, 0.5))
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", type=float, default=0.9)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--radius", type=int, default=256, help="box radius of the kernel test function")
    p.add_argument("--fn", help="FourierPolynomial JSON file instead of the kernel test function")
    p.add_argument("--kernel-radius", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("omega", help="alias probabilities in two dimensions, CSV")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--gamma", type=_floats, default=(1.0, 1.0))
    p.add_argument("--radius", type=int, default=30)
    p.add_argument("--out")
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("lowerbound", help="worst-case RMSE lower bound")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=_floats, required=True)
    p.add_argument("--verify", action="store_true", help="check the bound exhaustively with the fooling function")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--T", type=float, default=None, help="index-set threshold for --verify (default M)")
    p.set_defaults(func=cmd_lowerbound)

    p = sub.add_parser("selftest", help="run the oracle battery")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve_threads(args.threads)
        return args.func(args)
    except UsageError as exc:
        print(f"randlattice {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
