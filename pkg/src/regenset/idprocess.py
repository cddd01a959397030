"""Stationary infinitely divisible process driven by a null-recurrent chain.

With ``f = 1_{A0}`` the process only sees, for each path in the series
representation, its set of visit times to the distinguished state.  Under the
tilted path law on horizon ``n`` that set is a first-entrance time ``sigma``
with ``P(sigma = k) = F(k-1) / b_n^alpha`` followed by an independent renewal
process, so no state space is ever simulated.

``X_k = sum_j eps_j G(Gamma_j / (2 b_n^alpha)) 1{k in visit set j}`` and
``M_n(B) = max_{k in nB} X_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numba as nb
import numpy as np

from . import stats
from .errors import ValidationError
from .intersectlaw import ell_beta, shift_cdf_V_normalized
from .parallel import DEFAULT_CHUNK, run_replicates, run_until
from .randkit import RngStream, _check_positive, check_unit_open, nb_append_renewal
from .stablesets import GridSet
from .supmeasure import _intersect_sorted, eta_batch

DEFAULT_TRUNC = 64


@dataclass(frozen=True)
class LawSpec:
    """``alpha`` tail index, ``beta`` return-time tail, Levy tail ``a z**-alpha`` above ``z0``."""

    alpha: float
    beta: float
    a: float = 1.0
    z0: float = 1.0

    def __post_init__(self):
        _check_positive("alpha", self.alpha)
        check_unit_open("beta", self.beta)
        _check_positive("a", self.a)
        _check_positive("z0", self.z0)

    @property
    def cutoff(self) -> float:
        """``G`` vanishes at and above ``a * z0**-alpha``."""
        return self.a * self.z0 ** (-self.alpha)


# -- normalization -----------------------------------------------------------

@nb.njit(cache=True)
def _wandering_table(beta, n):
    # w[0] = 1, w[k] = w[k-1] + F(k-1) with F(0) = 1, F(j) = j**-beta; Kahan sums
    w = np.empty(n + 1)
    w[0] = 1.0
    s = 1.0
    c = 0.0
    for k in range(1, n + 1):
        term = 1.0 if k == 1 else (k - 1.0) ** (-beta)
        y = term - c
        t = s + y
        c = (t - s) - y
        s = t
        w[k] = s
    return w


@lru_cache(maxsize=32)
def wandering_table(beta: float, n: int) -> np.ndarray:
    """``b_k^alpha`` for ``k = 0..n``; read-only."""
    w = _wandering_table(float(beta), int(n))
    w.flags.writeable = False
    return w


def _check_n(n, minimum=0):
    if isinstance(n, bool) or int(n) != n or int(n) < minimum:
        raise ValidationError(f"n must be an integer >= {minimum}, got {n}")
    return int(n)


def wandering_weight(n: int, beta: float) -> float:
    """``b_n^alpha = sum_{k=0}^{n} F(k-1)`` with ``F(-1) = F(0) = 1``."""
    n = _check_n(n)
    beta = check_unit_open("beta", beta)
    return float(wandering_table(beta, n)[n])


def G_transform(x, spec: LawSpec):
    """``a**(1/alpha) x**(-1/alpha)`` below ``a z0**-alpha``, else 0."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0)):
        raise ValidationError("x must be positive")
    out = np.where(x_arr < spec.cutoff, spec.a ** (1.0 / spec.alpha) * x_arr ** (-1.0 / spec.alpha), 0.0)
    return float(out) if out.ndim == 0 else out


# -- compiled kernels --------------------------------------------------------

@nb.njit(cache=True)
def _first_entrance(table, n, u):
    """Smallest k with table[k] > u * table[n]."""
    target = u * table[n]
    lo = 0
    hi = n
    while lo < hi:
        mid = (lo + hi) // 2
        if table[mid] > target:
            hi = mid
        else:
            lo = mid + 1
    return lo


@nb.njit(cache=True)
def _draw_visits(gen, table, n, inv_beta, buf, pos):
    sigma = _first_entrance(table, n, gen.random())
    return nb_append_renewal(gen, inv_beta, sigma, n, buf, pos)


@nb.njit(cache=True)
def _draw_process(gen, L, table, n, inv_beta, gam, eps, offs, buf):
    """Arrivals, signs, then one visit set per term (fixed draw order)."""
    g = 0.0
    for j in range(L + 1):
        g += gen.standard_exponential()
        gam[j] = g
    for j in range(L):
        eps[j] = 1.0 if gen.random() < 0.5 else -1.0
    pos = 0
    for j in range(L):
        offs[j] = pos
        buf, pos = _draw_visits(gen, table, n, inv_beta, buf, pos)
    offs[L] = pos
    return buf


@nb.njit(cache=True)
def _g_weight(gamma, two_b, a_pow, inv_alpha, cutoff):
    x = gamma / two_b
    if x >= cutoff:
        return 0.0
    return a_pow * x ** (-inv_alpha)


@nb.njit(cache=True)
def _process_chunk(gen, count, n, beta, inv_alpha, a_pow, cutoff, levels, ell, klo, khi):
    nl = levels.shape[0]
    ni = klo.shape[0]
    L = levels[nl - 1]
    table = _wandering_table(beta, n)
    two_b = 2.0 * table[n]
    inv_beta = 1.0 / beta
    sups = np.zeros((count, nl, ni))
    diag = np.zeros((count, nl))
    coverage = np.zeros((count, nl))
    x0 = np.zeros(count)
    X = np.zeros(n + 1)
    cnt = np.zeros(n + 1, np.int32)
    gam = np.empty(L + 1)
    eps = np.empty(L)
    offs = np.empty(L + 1, np.int64)
    buf = np.empty(4096, np.int64)
    for r in range(count):
        buf = _draw_process(gen, L, table, n, inv_beta, gam, eps, offs, buf)
        X[:] = 0.0
        cnt[:] = 0
        over = 0
        j = 0
        for li in range(nl):
            while j < levels[li]:
                w = eps[j] * _g_weight(gam[j], two_b, a_pow, inv_alpha, cutoff)
                for p in range(offs[j], offs[j + 1]):
                    k = buf[p]
                    X[k] += w
                    cnt[k] += 1
                    if cnt[k] == ell + 1:
                        over += 1
                j += 1
            for i in range(ni):
                m = X[klo[i]]
                for k in range(klo[i] + 1, khi[i] + 1):
                    if X[k] > m:
                        m = X[k]
                sups[r, li, i] = m
            diag[r, li] = ell * _g_weight(gam[levels[li]], two_b, a_pow, inv_alpha, cutoff)
            coverage[r, li] = over / (n + 1.0)
        x0[r] = X[0]
    return sups, diag, coverage, x0


@nb.njit(cache=True)
def _pair_visit_chunk(gen, count, table, n, beta, n_sets):
    """First common visit time of ``n_sets`` independent visit sets, or -1."""
    inv_beta = 1.0 / beta
    out = np.full(count, -1, np.int64)
    bufs = [np.empty(1024, np.int64) for _ in range(n_sets)]
    lens = np.zeros(n_sets, np.int64)
    for r in range(count):
        for j in range(n_sets):
            bufs[j], lens[j] = _draw_visits(gen, table, n, inv_beta, bufs[j], 0)
        common = bufs[0][: lens[0]]
        for j in range(1, n_sets):
            common = _intersect_sorted(common, bufs[j][: lens[j]])
        if common.shape[0] > 0:
            out[r] = common[0]
    return out


# -- single paths ------------------------------------------------------------

def sample_visit_set(stream: RngStream, n: int, beta: float) -> GridSet:
    """Visit times in ``{0, ..., n}`` of one path from the tilted law on horizon ``n``."""
    n = _check_n(n, 1)
    beta = check_unit_open("beta", beta)
    buf = np.empty(64, np.int64)
    buf, pos = _draw_visits(stream.generator, wandering_table(beta, n), n, 1.0 / beta, buf, 0)
    return GridSet(n, buf[:pos].copy())


def sample_first_entrance(stream: RngStream, n: int, beta: float, size: int) -> np.ndarray:
    """First-entrance times ``sigma`` alone (``size`` i.i.d. draws)."""
    n = _check_n(n, 1)
    table = wandering_table(check_unit_open("beta", beta), n)
    u = stream.generator.random(int(size))
    return np.searchsorted(table, u * table[n], side="right")


@dataclass(frozen=True, eq=False)
class ProcessPath:
    n: int
    values: np.ndarray
    contributing_sets: list
    epsilons: np.ndarray
    weights: np.ndarray
    gammas: np.ndarray
    truncation_diag: float
    b_alpha: float

    def recompute(self) -> np.ndarray:
        """``X_k`` rebuilt term by term from the stored series."""
        X = np.zeros(self.n + 1)
        for e, w, s in zip(self.epsilons, self.weights, self.contributing_sets):
            X[s.points] += e * w
        return X


def _validate_trunc(beta, ell_trunc):
    ell = ell_beta(beta)
    if int(ell_trunc) < ell + 1:
        raise ValidationError(f"ell_trunc must be >= ell_beta + 1 = {ell + 1}, got {ell_trunc}")
    return ell, int(ell_trunc)


def simulate_process(stream: RngStream, n: int, spec: LawSpec, ell_trunc: int = DEFAULT_TRUNC) -> ProcessPath:
    """Truncated series for ``X_0, ..., X_n``."""
    n = _check_n(n, 1)
    ell, L = _validate_trunc(spec.beta, ell_trunc)
    table = wandering_table(spec.beta, n)
    gam = np.empty(L + 1)
    eps = np.empty(L)
    offs = np.empty(L + 1, np.int64)
    buf = np.empty(4096, np.int64)
    buf = _draw_process(stream.generator, L, table, n, 1.0 / spec.beta, gam, eps, offs, buf)
    b = float(table[n])
    weights = G_transform(gam[:L] / (2.0 * b), spec)
    sets = [GridSet(n, buf[offs[j]:offs[j + 1]].copy()) for j in range(L)]
    X = np.zeros(n + 1)
    for j in range(L):
        X[sets[j].points] += eps[j] * weights[j]
    diag = ell * float(G_transform(gam[L] / (2.0 * b), spec))
    return ProcessPath(n, X, sets, eps.copy(), np.asarray(weights), gam[:L].copy(), diag, b)


def sup_measure_Mn(path: ProcessPath, interval) -> float:
    """``max X_k`` over grid points ``k`` with ``k / n`` inside the open interval."""
    lo, hi = interval
    if not 0.0 <= lo < hi <= 1.0:
        raise ValidationError(f"interval {interval} must be an open sub-interval of (0, 1)")
    n = path.n
    k_lo = math.floor(lo * n) + 1
    k_hi = math.ceil(hi * n) - 1
    if k_hi < k_lo:
        raise ValidationError(f"interval {interval} contains no grid point k/{n}")
    return float(path.values[k_lo:k_hi + 1].max())


# -- experiments -------------------------------------------------------------

def _process_task(stream, count, n, spec, levels, intervals):
    ranges = []
    for lo, hi in intervals:
        k_lo = math.floor(lo * n) + 1
        k_hi = math.ceil(hi * n) - 1
        ranges.append((k_lo, k_hi))
    ranges = np.array(ranges, dtype=np.int64)
    sups, diag, coverage, x0 = _process_chunk(
        stream.generator, count, n, spec.beta, 1.0 / spec.alpha, spec.a ** (1.0 / spec.alpha),
        spec.cutoff, np.asarray(levels, dtype=np.int64), ell_beta(spec.beta),
        ranges[:, 0].copy(), ranges[:, 1].copy())
    return {"sups": sups, "diag": diag, "coverage": coverage, "x0": x0}


def process_batch(spec: LawSpec, n: int, reps: int, seed: int, intervals=((0.0, 1.0),),
                  ell_trunc: int = DEFAULT_TRUNC, levels=None, threads: int = 1, key=(10,),
                  chunk: int = DEFAULT_CHUNK):
    """Replicated ``M_n`` over each interval and truncation level (raw, not normalized)."""
    n = _check_n(n, 2)
    levels = tuple(sorted({int(ell_trunc)} | set(levels or ())))
    _validate_trunc(spec.beta, levels[0])
    for lo, hi in intervals:
        if not 0.0 <= lo < hi <= 1.0 or math.ceil(hi * n) - 1 < math.floor(lo * n) + 1:
            raise ValidationError(f"interval ({lo}, {hi}) holds no grid point at n = {n}")
    return run_replicates(_process_task, reps, seed, key, threads, chunk,
                          dict(n=n, spec=spec, levels=levels, intervals=tuple(intervals)))


def marginal_tail(spec: LawSpec, x: float, reps: int, seed: int, n: int = 10,
                  ell_trunc: int = DEFAULT_TRUNC, threads: int = 1):
    """``x**alpha P(X_0 > x) / a`` with a 99% interval (``||f||_alpha^alpha = 1``).

    The marginal law does not depend on ``n``; a small horizon keeps every
    non-zero series term inside the truncation.
    """
    out = process_batch(spec, n, reps, seed, ell_trunc=ell_trunc, threads=threads, key=(11,))
    x0 = out["x0"]
    tr = stats.tail_ratio(x0, spec.alpha, x)
    return {"x": x, "estimate": tr.estimate / spec.a, "ci_low": tr.ci_low / spec.a,
            "ci_high": tr.ci_high / spec.a, "x0": x0,
            "max_truncation_diag": float(out["diag"][:, -1].max())}


def limit_experiment(spec: LawSpec, n_list, intervals, reps: int, seed: int,
                     ell_trunc: int = DEFAULT_TRUNC, resolution: int = 10_000, threads: int = 1,
                     doubling: bool = True, run: int = 0):
    """KS distances between ``M_n(I) / b_n`` and ``a**(1/alpha) eta(I)`` reference samples.

    Every horizon reuses the same substreams (common random numbers) and one
    shared reference batch; with ``doubling`` both sides are also evaluated
    at ``2 * ell_trunc`` on the same draws.
    """
    if reps < 1000:
        raise ValidationError(f"reps must be >= 10^3 per horizon, got {reps}")
    intervals = tuple((float(a), float(b)) for a, b in intervals)
    levels = (ell_trunc, 2 * ell_trunc) if doubling else (ell_trunc,)
    ref = eta_batch(spec.alpha, spec.beta, reps, seed, intervals, ell_trunc, resolution,
                    levels=levels, threads=threads, key=(12, run, 0))
    scale = spec.a ** (1.0 / spec.alpha)
    rows = []
    for n in n_list:
        out = process_batch(spec, n, reps, seed, intervals, ell_trunc, levels, threads,
                            key=(12, run, 1))
        b_n = wandering_weight(n, spec.beta) ** (1.0 / spec.alpha)
        for i, iv in enumerate(intervals):
            row = {"n": int(n), "lo": iv[0], "hi": iv[1], "b_n": b_n}
            for li, lev in enumerate(levels):
                ks = stats.ks_two_sample(out["sups"][:, li, i] / b_n, scale * ref.sups[:, li, i])
                row["ks" if li == 0 else "ks_doubled"] = ks
            row["process_trunc_diag"] = float(np.median(out["diag"][:, 0])) / b_n
            row["eta_tail_bound"] = float(np.median(ref.tail[:, 0]))
            rows.append(row)
    return rows


def first_visit_experiment(n: int, beta: float, reps: int, seed: int):
    """KS between ``sigma / n`` and the CDF ``v**(1-beta)``."""
    sigma = sample_first_entrance(RngStream(seed, (13,)), n, beta, reps)
    ks = stats.ks_one_sample(sigma / n, lambda v: np.clip(v, 0.0, 1.0) ** (1.0 - beta))
    p0 = float(np.mean(sigma == 0))
    return {"ks": ks, "p_sigma0": p0, "p_sigma0_exact": 1.0 / wandering_weight(n, beta)}


def _pair_task(stream, count, n, beta, n_sets):
    first = _pair_visit_chunk(stream.generator, count, wandering_table(beta, n), n, beta, n_sets)
    return {"first": first, "ok": first >= 0}


def simultaneous_visit_experiment(n: int, beta: float, accepted: int, seed: int, n_sets: int = 2,
                                  threads: int = 1, chunk: int = DEFAULT_CHUNK):
    """First common visit of independent visit sets over ``n``, given it is ``<= n``,
    against the normalized shift law."""
    n = _check_n(n, 1)
    betas = [check_unit_open("beta", beta)] * n_sets
    shift_cdf_V_normalized(1.0, betas)  # regime check
    out, attempted = run_until(_pair_task, "ok", accepted, seed, (14,), threads, chunk,
                               dict(n=n, beta=beta, n_sets=n_sets))
    pts = out["first"][out["ok"]] / n
    ks = stats.ks_one_sample(pts, lambda x: shift_cdf_V_normalized(np.clip(x, 0, 1), betas))
    return {"ks": ks, "accepted": int(len(pts)), "attempted": attempted}


def scale_coupling_check(spec: LawSpec, n: int, reps: int, seed: int, ell_trunc: int = DEFAULT_TRUNC):
    """Max deviation of ``M_n`` under ``(2a, 2**(1/alpha) z0)`` from ``2**(1/alpha) M_n`` under ``(a, z0)``.

    The pair keeps ``a z0**-alpha`` fixed, so with shared streams the series
    differ by the exact factor ``2**(1/alpha)``.
    """
    twin = LawSpec(spec.alpha, spec.beta, 2.0 * spec.a, 2.0 ** (1.0 / spec.alpha) * spec.z0)
    m1 = process_batch(spec, n, reps, seed, ell_trunc=ell_trunc, key=(15,))["sups"][:, 0, 0]
    m2 = process_batch(twin, n, reps, seed, ell_trunc=ell_trunc, key=(15,))["sups"][:, 0, 0]
    return float(np.max(np.abs(m2 - 2.0 ** (1.0 / spec.alpha) * m1)) / max(1.0, np.max(np.abs(m2))))
