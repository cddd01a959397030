"""Command-line harness: ``regenset <command> [flags]``.

Every command writes a result envelope (JSON by default, CSV with
``--format csv``) to ``--out`` or stdout.  Exit status is 0 on success, 2
on invalid input and 1 on any other failure, including a failed ``verify``.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import acceptance, idprocess, intersectlaw, renewalkit, stablesets, stats, supmeasure
from .envelope import ResultEnvelope, write_envelope
from .errors import ValidationError
from .intersectlaw import QuadratureConfig
from .parallel import default_threads
from .randkit import RngStream

DEFAULT_SEED = 1
SEED_ENV = "REGEN_SEED"

# fixed CSV headers, one per command
COLUMNS = {
    "sample-overshoot": ["index", "value"],
    "intersection-cdf": ["beta1", "beta2", "a", "x", "cdf"],
    "sample-intersection": ["index", "value", "deficit", "terms"],
    "shift-law": ["ell", "beta", "x", "cdf", "cdf_normalized"],
    "phi": ["beta", "phi"],
    "simulate-eta": ["k", "t", "value"],
    "eta-tail": ["alpha", "beta", "x", "estimate", "ci_low", "ci_high", "frechet_lower", "exceedances"],
    "self-similarity": ["alpha", "beta", "scale", "H", "ks", "threshold"],
    "stationarity": ["alpha", "beta", "t0", "s", "window", "ks", "threshold"],
    "interpolation": ["alpha", "beta", "ks_frechet", "ks_complete", "median"],
    "simulate-process": ["k", "t", "value"],
    "limit-experiment": ["n", "lo", "hi", "b_n", "ks", "ks_doubled", "process_trunc_diag", "eta_tail_bound"],
    "renewal-asymptotics": ["quantity", "beta", "n", "ratio"],
    "dp-oracle": ["beta1", "beta2", "a", "n", "x", "dp_cdf", "continuum_cdf", "abs_diff"],
    "verify": ["criterion", "name", "passed", "measured"],
}


# -- command bodies: (args, seed, threads) -> (rows, diagnostics) -------------

def _sample_overshoot(args, seed, threads):
    b = stablesets.sample_overshoot(RngStream(seed, (201,)), args.x, args.beta, args.reps)
    ks = stats.ks_one_sample(b, lambda v: stablesets.overshoot_cdf(v, args.x, args.beta))
    rows = [{"index": i, "value": v} for i, v in enumerate(b.tolist())]
    return rows, {"ks_vs_analytic": ks}


def _quad(args):
    return QuadratureConfig(abs_tol=args.quad_tol)


def _intersection_cdf(args, seed, threads):
    xs = np.asarray(args.x, dtype=float)
    cdf = np.atleast_1d(intersectlaw.intersection_cdf(xs, args.a, args.beta1, args.beta2, _quad(args)))
    rows = [{"beta1": args.beta1, "beta2": args.beta2, "a": args.a, "x": float(x), "cdf": float(c)}
            for x, c in zip(xs, cdf)]
    return rows, {"beta12": args.beta1 + args.beta2 - 1.0}


def _sample_intersection(args, seed, threads):
    spec = stablesets.IntersectionSpec(args.a, args.beta1, args.beta2)
    out = stablesets.sample_first_intersection(RngStream(seed, (202,)), spec, args.rel_tol,
                                               size=args.reps, diagnostics=True)
    rows = [{"index": i, "value": v, "deficit": d, "terms": int(t)}
            for i, (v, d, t) in enumerate(zip(out.values.tolist(), out.deficit.tolist(), out.terms))]
    return rows, {"max_deficit": float(out.deficit.max()), "mean_terms": float(out.terms.mean())}


def _shift_law(args, seed, threads):
    betas = [args.beta] * args.ell
    xs = np.asarray(args.x, dtype=float)
    raw = np.atleast_1d(intersectlaw.shift_cdf_V(xs, betas))
    norm = np.atleast_1d(intersectlaw.shift_cdf_V_normalized(xs, betas))
    rows = [{"ell": args.ell, "beta": args.beta, "x": float(x), "cdf": float(r), "cdf_normalized": float(m)}
            for x, r, m in zip(xs, raw, norm)]
    diag = {"beta_star": intersectlaw.beta_star(betas)}
    if args.reps:
        mc = supmeasure.shift_law_experiment(args.beta, args.ell, args.reps, seed, args.resolution, threads)
        diag.update({"ks_monte_carlo": mc["ks"], "accepted": mc["accepted"],
                     "acceptance_rate": mc["acceptance_rate"]})
    return rows, diag


def _phi(args, seed, threads):
    return [{"beta": b, "phi": stablesets.phi(b, args.quad_tol)} for b in args.beta], {}


def _simulate_eta(args, seed, threads):
    r = supmeasure.simulate_eta(RngStream(seed, (203,)), args.alpha, args.beta, args.trunc,
                                args.resolution, args.window)
    rows = [{"k": k, "t": k / r.resolution, "value": v} for k, v in enumerate(r.values.tolist())]
    diag = {"tail_bound": r.tail_bound, "coincidence_count": r.coincidence_count,
            "coverage_slack": r.slack, "ell_beta": r.ell_beta, "weights": r.weights[:5].tolist()}
    return rows, diag


def _eta_tail(args, seed, threads):
    rows, diag = supmeasure.eta_tail_experiment(args.alpha, args.beta, args.x, args.reps, seed,
                                                args.trunc, args.resolution, threads)
    for row in rows:
        row.update(alpha=args.alpha, beta=args.beta)
    return rows, diag


def _self_similarity(args, seed, threads):
    out = supmeasure.selfsimilarity_experiment(args.alpha, args.beta, args.scale, args.reps, seed,
                                               args.trunc, args.resolution, threads)
    return [{"alpha": args.alpha, "beta": args.beta, "scale": args.scale, **out}], {}


def _stationarity(args, seed, threads):
    out = supmeasure.stationarity_experiment(args.alpha, args.beta, args.t0, args.s, args.reps, seed,
                                             args.window, args.trunc, args.resolution, threads)
    return [{"alpha": args.alpha, "beta": args.beta, "t0": args.t0, "s": args.s, **out}], {}


def _interpolation(args, seed, threads):
    rows = supmeasure.interpolation_check(args.alpha, args.beta, args.reps, seed, args.trunc,
                                          args.resolution, threads)
    for row in rows:
        row["alpha"] = args.alpha
    return rows, {}


def _law(args):
    return idprocess.LawSpec(args.alpha, args.beta, args.a, args.z0)


def _simulate_process(args, seed, threads):
    path = idprocess.simulate_process(RngStream(seed, (204,)), args.n, _law(args), args.trunc)
    rows = [{"k": k, "t": k / path.n, "value": v} for k, v in enumerate(path.values.tolist())]
    diag = {"truncation_diag": path.truncation_diag, "b_n_alpha": path.b_alpha,
            "nonempty_sets": sum(1 for s in path.contributing_sets if len(s))}
    return rows, diag


def _limit_experiment(args, seed, threads):
    ivs = ((0.0, 1.0), (0.0, 0.5), (0.5, 1.0))
    rows = idprocess.limit_experiment(_law(args), args.n, ivs, args.reps, seed, args.trunc,
                                      args.resolution, threads, run=args.run)
    return rows, {}


def _renewal_asymptotics(args, seed, threads):
    rows, cons = renewalkit.renewal_asymptotics(tuple(args.beta), args.n, args.pair_beta)
    return rows, {"conservation_error": cons}


def _dp_oracle(args, seed, threads):
    l1, l2 = renewalkit.RenewalLaw(args.beta1), renewalkit.RenewalLaw(args.beta2)
    intersectlaw.intersection_cdf(1.0, args.a, args.beta1, args.beta2)  # regime check
    offset = int(round(args.a * args.n))
    idx = [int(round(x * args.n)) for x in args.x]
    if min(idx) < 0:
        raise ValidationError("x must be nonnegative")
    F = renewalkit.first_simultaneous_renewal_cdf(l1, l2, offset, max(max(idx), offset, 1))
    cont = np.atleast_1d(intersectlaw.intersection_cdf(np.asarray(args.x, dtype=float), args.a,
                                                       args.beta1, args.beta2, _quad(args)))
    rows = [{"beta1": args.beta1, "beta2": args.beta2, "a": args.a, "n": args.n, "x": float(x),
             "dp_cdf": float(F[i]), "continuum_cdf": float(c), "abs_diff": abs(float(F[i]) - float(c))}
            for x, i, c in zip(args.x, idx, cont)]
    return rows, {"offset": offset}


def _verify(args, seed, threads):
    only = set(args.only) if args.only else None
    res = acceptance.run_all(seed, threads, only=only)
    rows = [{"criterion": r.number, "name": r.name, "passed": bool(r.passed), "measured": r.measured}
            for r in res]
    return rows, {"passed": sum(r.passed for r in res), "failed": sum(not r.passed for r in res)}


# -- argument parsing ---------------------------------------------------------

def _common(p):
    p.add_argument("--seed", type=int, default=None,
                   help=f"run seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: available cores)")


def _sim(p, reps=None, trunc=True, resolution=True):
    if reps is not None:
        p.add_argument("--reps", type=int, default=reps)
    if trunc:
        p.add_argument("--trunc", type=int, default=supmeasure.DEFAULT_TRUNC)
    if resolution:
        p.add_argument("--resolution", type=int, default=supmeasure.DEFAULT_RESOLUTION)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regenset", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=fn)
        _common(p)
        return p

    p = cmd("sample-overshoot", _sample_overshoot, "draw overshoots of level x")
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=10_000)

    p = cmd("intersection-cdf", _intersection_cdf, "CDF of the first intersection time")
    p.add_argument("--beta1", type=float, default=0.75)
    p.add_argument("--beta2", type=float, default=0.75)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--x", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0, 4.0])
    p.add_argument("--quad-tol", type=float, default=1e-10)

    p = cmd("sample-intersection", _sample_intersection, "sample first intersection times")
    p.add_argument("--beta1", type=float, default=0.75)
    p.add_argument("--beta2", type=float, default=0.75)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--rel-tol", type=float, default=1e-9)

    p = cmd("shift-law", _shift_law, "law of the first point of an l-fold shifted intersection")
    p.add_argument("--beta", type=float, default=0.8)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--x", type=float, nargs="+", default=[k / 10 for k in range(11)])
    p.add_argument("--reps", type=int, default=0, help="accepted Monte Carlo replicates (0: none)")
    p.add_argument("--resolution", type=int, default=supmeasure.DEFAULT_RESOLUTION)

    p = cmd("phi", _phi, "the phi functional")
    p.add_argument("--beta", type=float, nargs="+", default=[0.5])
    p.add_argument("--quad-tol", type=float, default=1e-12)

    p = cmd("simulate-eta", _simulate_eta, "one truncated realization of eta on a grid")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--window", type=float, default=1.0)
    _sim(p)

    p = cmd("eta-tail", _eta_tail, "tail of eta((0,1)) against x**-alpha")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.6)
    p.add_argument("--x", type=float, nargs="+", default=[2.0, 5.0, 10.0, 20.0, 50.0])
    _sim(p, reps=100_000)

    p = cmd("self-similarity", _self_similarity, "KS check of the scaling property")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--scale", type=float, default=0.5)
    _sim(p, reps=100_000)

    p = cmd("stationarity", _stationarity, "KS check of shift invariance")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--t0", type=float, default=0.5)
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--window", type=float, default=None)
    _sim(p, reps=100_000)

    p = cmd("interpolation", _interpolation, "distance to the Frechet and complete-dependence ends")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, nargs="+", default=[0.1, 0.5, 0.9, 0.99])
    _sim(p, reps=10_000)

    p = cmd("simulate-process", _simulate_process, "one truncated path X_0..X_n")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--z0", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1000)
    _sim(p, resolution=False)

    p = cmd("limit-experiment", _limit_experiment, "KS of M_n / b_n against eta")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--z0", type=float, default=1.0)
    p.add_argument("--n", type=int, nargs="+", default=[100, 1000, 10_000])
    p.add_argument("--run", type=int, default=0, help="substream index of this run")
    _sim(p, reps=1000)

    p = cmd("renewal-asymptotics", _renewal_asymptotics, "exact renewal ratios")
    p.add_argument("--beta", type=float, nargs="+", default=[0.6, 0.8])
    p.add_argument("--pair-beta", type=float, default=0.8)
    p.add_argument("--n", type=int, default=100_000)

    p = cmd("dp-oracle", _dp_oracle, "exact discrete first common renewal vs continuum CDF")
    p.add_argument("--beta1", type=float, default=0.75)
    p.add_argument("--beta2", type=float, default=0.75)
    p.add_argument("--a", type=float, default=0.3, help="offset as a fraction of n")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--x", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    p.add_argument("--quad-tol", type=float, default=1e-10)

    p = cmd("verify", _verify, "run the acceptance checks")
    p.add_argument("--only", type=int, nargs="+", default=None, help="criterion numbers to run")
    return ap


def _resolve_seed(flag):
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _config(args) -> dict:
    skip = {"func", "out", "format", "threads", "command", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse already printed its message
        return int(e.code or 0)
    try:
        seed = _resolve_seed(args.seed)
        if seed < 0:
            raise ValidationError(f"seed must be nonnegative, got {seed}")
        threads = default_threads() if args.threads is None else args.threads
        if threads < 1:
            raise ValidationError(f"threads must be >= 1, got {threads}")
        t0 = time.perf_counter()
        rows, diag = args.func(args, seed, threads)
        elapsed = time.perf_counter() - t0
    except ValidationError as e:
        print(f"regenset: invalid input: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"regenset: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    # verify output must be byte-stable, so its timing only goes to stderr
    wall = None if args.command == "verify" else elapsed
    env = ResultEnvelope(args.command, _config(args), seed, COLUMNS[args.command], rows, diag, wall)
    print(f"regenset {args.command}: {elapsed:.2f} s", file=sys.stderr)
    try:
        write_envelope(env, args.format, args.out)
    except OSError as e:
        print(f"regenset: cannot write output: {e}", file=sys.stderr)
        return 1
    if args.command == "verify" and diag["failed"]:
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
