"""Acceptance checks run by ``regenset verify``.

Each check returns a :class:`Criterion` holding its measured values and a
pass flag.  Every random quantity is derived from the single run seed
through fixed substream keys, so the records do not depend on the worker
count.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import idprocess, intersectlaw, renewalkit, stablesets, stats, supmeasure
from .parallel import run_replicates
from .randkit import RngStream
from .stablesets import IntersectionSpec


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


# -- 1 ----------------------------------------------------------------------

def overshoot_law(seed, threads=1):
    stream = RngStream(seed, (101,))
    samples, dt = _timed(stablesets.sample_overshoot, stream, 1.0, 0.7, 100_000)
    ks = stats.ks_one_sample(samples, lambda b: stablesets.overshoot_cdf(b, 1.0, 0.7))
    fast = dt < 5.0
    return Criterion(1, "overshoot sampler vs analytic law", ks <= 0.01 and fast,
                     {"ks": ks, "threshold": 0.01, "runtime_under_5s": fast}), dt


# -- 2 ----------------------------------------------------------------------

def _intersection_task(stream, count, spec, rel_tol):
    return {"d": stablesets.sample_first_intersection(stream, spec, rel_tol, size=count)}


def intersection_mc(seed, threads=1):
    spec = IntersectionSpec(1.0, 0.75, 0.75)
    xs = [0.25, 0.5, 1.0, 2.0, 4.0]
    t0 = time.perf_counter()
    d = run_replicates(_intersection_task, 1_000_000, seed, (102,), threads, chunk=50_000,
                       params=dict(spec=spec, rel_tol=1e-9))["d"]
    dt = time.perf_counter() - t0
    dist = stats.ecdf(d)
    exact = intersectlaw.intersection_cdf(np.array(xs), 1.0, 0.75, 0.75)
    gaps = [abs(float(dist(x)) - float(e)) for x, e in zip(xs, exact)]
    fast = dt < 60.0
    return Criterion(2, "first intersection CDF vs Monte Carlo", max(gaps) <= 0.005 and fast,
                     {"max_abs_diff": max(gaps), "threshold": 0.005, "x": xs, "abs_diff": gaps,
                      "runtime_under_60s": fast}), dt


# -- 3 ----------------------------------------------------------------------

def recursion(seed=None, threads=1):
    xs = [0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 20.0]
    grid = [0.6, 0.75, 0.9]
    worst = 0.0
    count = 0
    for b1 in grid:
        for b2 in grid:
            if stablesets.exact_beta_star((b1, b2)) <= 0:
                continue
            for x in xs:
                worst = max(worst, intersectlaw.recursion_residual(x, b1, b2))
                count += 1
    return Criterion(3, "renewal identity residual", worst <= 1e-6,
                     {"max_residual": worst, "threshold": 1e-6, "cases": count})


# -- 4 ----------------------------------------------------------------------

def dp_oracle(seed=None, threads=1, n=2000, frac=0.3, beta=0.75):
    law = renewalkit.RenewalLaw(beta)
    xs = [0.5, 1.0, 2.0]
    offset = int(round(frac * n))
    F = renewalkit.first_simultaneous_renewal_cdf(law, law, offset, int(max(xs) * n))
    cont = intersectlaw.intersection_cdf(np.array(xs), frac, beta, beta)
    dp = [float(F[int(round(x * n))]) for x in xs]
    gaps = [abs(p - float(c)) for p, c in zip(dp, cont)]
    return Criterion(4, "discrete renewal DP vs continuum law", max(gaps) <= 0.02,
                     {"max_abs_diff": max(gaps), "threshold": 0.02, "x": xs, "dp_cdf": dp,
                      "continuum_cdf": [float(c) for c in cont]})


# -- 5 ----------------------------------------------------------------------

def shift_law(seed, threads=1):
    out = supmeasure.shift_law_experiment(0.8, 2, 10_000, seed, 10_000, threads)
    return Criterion(5, "two-fold shift law", out["ks"] <= 0.03,
                     {"ks": out["ks"], "threshold": 0.03, "accepted": out["accepted"],
                      "acceptance_rate": out["acceptance_rate"],
                      "theoretical_rate": float(intersectlaw.shift_cdf_V(1.0, [0.8, 0.8]))})


# -- 6 ----------------------------------------------------------------------

def _sign(v, tol=1e-9):
    return 0 if abs(v) <= tol else (1 if v > 0 else -1)


def phi_dichotomy(seed=None, threads=1):
    from fractions import Fraction

    half = stablesets.phi(0.5)
    grid = [k / 10 for k in range(1, 10)]
    table = {b: stablesets.phi(b) for b in grid}
    mismatches = 0
    for b1 in grid:
        for b2 in grid:
            lhs = _sign(table[b1] - stablesets.phi(1.0 - b2))
            exact = 1 - Fraction(repr(b1)) - Fraction(repr(b2))
            if lhs != (exact > 0) - (exact < 0):
                mismatches += 1
    fine = [stablesets.phi(k / 100) for k in range(5, 100, 5)]
    decreasing = bool(np.all(np.diff(fine) < 0))
    ok = abs(half) <= 1e-8 and mismatches == 0 and decreasing
    return Criterion(6, "phi dichotomy", ok,
                     {"phi_half": half, "sign_mismatches": mismatches, "strictly_decreasing": decreasing})


# -- 7 ----------------------------------------------------------------------

def eta_tail(seed, threads=1, reps=1_000_000):
    rows, diag = supmeasure.eta_tail_experiment(1.0, 0.6, [50.0], reps, seed, threads=threads)
    r = rows[0]
    in_band = 0.9 <= r["estimate"] <= 1.1
    sandwich = diag["lower_violations"] == 0 and diag["upper_violations"] == 0
    m = {"estimate": r["estimate"], "ci_low": r["ci_low"], "ci_high": r["ci_high"], "band": [0.9, 1.1]}
    m.update(diag)
    return Criterion(7, "eta tail and per-replicate sandwich", in_band and sandwich, m)


# -- 8 ----------------------------------------------------------------------

def invariance(seed, threads=1, reps=100_000):
    out = supmeasure.invariance_experiment(1.0, 0.7, reps, seed, window=2.0, threads=threads)
    ok = (out["ks_selfsimilarity"] <= 0.02 and out["ks_stationarity"] <= 0.02
          and abs(out["slope"] - out["H"]) <= 0.05)
    return Criterion(8, "self-similarity, stationarity and scaling slope", ok,
                     {"ks_selfsimilarity": out["ks_selfsimilarity"],
                      "ks_stationarity": out["ks_stationarity"], "threshold": 0.02,
                      "slope": out["slope"], "H": out["H"], "slope_tolerance": 0.05})


# -- 9 ----------------------------------------------------------------------

def limit_theorem(seed, threads=1, runs=5):
    spec = idprocess.LawSpec(1.0, 0.7, 1.0, 1.0)
    n_list = [100, 1000, 10_000]
    ivs = ((0.0, 1.0), (0.0, 0.5), (0.5, 1.0))
    ks = np.zeros((runs, len(n_list), len(ivs)))
    ks2 = np.zeros_like(ks)
    for r in range(runs):
        rows = idprocess.limit_experiment(spec, n_list, ivs, 1000, seed, threads=threads, run=r)
        for row in rows:
            i, j = n_list.index(row["n"]), ivs.index((row["lo"], row["hi"]))
            ks[r, i, j] = row["ks"]
            ks2[r, i, j] = row["ks_doubled"]
    med = np.median(ks, axis=0)
    med2 = np.median(ks2, axis=0)
    full = med[:, 0]
    monotone = bool(np.all(np.diff(full) <= 0))
    shift = float(np.max(np.abs(med - med2)))
    ok = monotone and full[-1] <= 0.08 and med[-1, 1] <= 0.08 and med[-1, 2] <= 0.08 and shift <= 0.01
    return Criterion(9, "convergence of process maxima", ok,
                     {"n": n_list, "median_ks_unit": full.tolist(), "non_increasing": monotone,
                      "median_ks_first_half": float(med[-1, 1]),
                      "median_ks_second_half": float(med[-1, 2]), "threshold": 0.08,
                      "max_doubling_change": shift, "doubling_threshold": 0.01})


# -- 10 ---------------------------------------------------------------------

def first_visits(seed, threads=1):
    a = idprocess.first_visit_experiment(10_000, 0.7, 100_000, seed)
    b = idprocess.simultaneous_visit_experiment(10_000, 0.8, 10_000, seed, threads=threads)
    ok = a["ks"] <= 0.02 and b["ks"] <= 0.03
    return Criterion(10, "first visit and first simultaneous visit laws", ok,
                     {"ks_first_visit": a["ks"], "threshold_first_visit": 0.02,
                      "p_sigma0": a["p_sigma0"], "p_sigma0_exact": a["p_sigma0_exact"],
                      "ks_simultaneous": b["ks"], "threshold_simultaneous": 0.03,
                      "accepted": b["accepted"], "attempted": b["attempted"]})


# -- 11 ---------------------------------------------------------------------

def renewal(seed=None, threads=1):
    rows, conservation = renewalkit.renewal_asymptotics((0.6, 0.8), 100_000, 0.8)
    m = {}
    ok = conservation <= 1e-14
    for r in rows:
        if r["quantity"] == "U":
            continue
        key = f"{r['quantity']}_ratio_beta_{r['beta']}"
        m[key] = r["ratio"]
        lo, hi = (0.95, 1.05) if r["quantity"] == "u" else (0.9, 1.1)
        ok = ok and lo <= r["ratio"] <= hi
    m["conservation_error"] = conservation
    return Criterion(11, "renewal asymptotics", ok, m)


# -- 12 ---------------------------------------------------------------------

def normalization(seed=None, threads=1):
    beta, n = 0.5, 1_000_000
    w = idprocess.wandering_weight(n, beta)
    ratio = w * (1.0 - beta) / n ** (1.0 - beta)
    b0 = idprocess.wandering_weight(0, beta)
    b1 = idprocess.wandering_weight(1, beta)
    ok = abs(ratio - 1.0) <= 0.02 and b0 == 1.0 and b1 == 2.0
    return Criterion(12, "normalizing sequence", ok, {"ratio": ratio, "b0": b0, "b1": b1})


CHECKS = [overshoot_law, intersection_mc, recursion, dp_oracle, shift_law, phi_dichotomy,
          eta_tail, invariance, limit_theorem, first_visits, renewal, normalization]


def run_all(seed: int, threads: int = 1, only=None, log=sys.stderr) -> list[Criterion]:
    """Run the checks (all, or those numbered in ``only``) in order."""
    out = []
    for fn in CHECKS:
        num = CHECKS.index(fn) + 1
        if only is not None and num not in only:
            continue
        t0 = time.perf_counter()
        res = fn(seed, threads)
        if isinstance(res, tuple):
            res = res[0]
        if log is not None:
            state = "PASS" if res.passed else "FAIL"
            print(f"[{num:2d}] {state} {res.name} ({time.perf_counter() - t0:.1f} s)", file=log)
        out.append(res)
    return out
