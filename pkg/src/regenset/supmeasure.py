"""The random sup-measure eta^{alpha,beta} through its Poisson series.

A realization is ``eta(t) = sum_j Gamma_j**(-1/alpha) 1{t in V_j + R_j}`` with
``Gamma_j`` unit-rate Poisson arrivals, ``V_j`` i.i.d. shifts with CDF
``v**(1-beta)`` on [0, 1] and ``R_j`` independent beta-stable regenerative
sets.  Only the first ``ell_trunc`` terms are kept; since at most ``ell_beta``
sets can cover a point, the omitted terms add at most
``ell_beta * Gamma_{ell_trunc+1}**(-1/alpha)`` anywhere.

On a window ``[0, T]`` with ``T > 1`` the shifts have density proportional
to ``v**-beta`` on ``[0, T]`` and the weights pick up the factor
``T**((1-beta)/alpha)``, matching the half-line intensity restricted to the
window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numba as nb
import numpy as np

from . import stats
from .errors import ValidationError
from .intersectlaw import ell_beta, shift_cdf_V_normalized
from .parallel import DEFAULT_CHUNK, run_replicates, run_until
from .randkit import RngStream, _check_positive, check_unit_open, nb_append_renewal
from .stablesets import GridSet

DEFAULT_TRUNC = 64
DEFAULT_RESOLUTION = 10_000
MIN_RESOLUTION = 100


# -- compiled kernels --------------------------------------------------------

@nb.njit(cache=True)
def _draw_eta(gen, n_sets, inv_q, inv_beta, res, upper, window, gam, shifts, offs, buf):
    """Arrivals, then per set: one uniform for the shift and the renewal steps."""
    g = 0.0
    for j in range(n_sets + 1):
        g += gen.standard_exponential()
        gam[j] = g
    pos = 0
    for j in range(n_sets):
        v = window * gen.random() ** inv_q
        s = np.int64(math.ceil(v * res))
        if s < 1:
            s = 1
        if s > upper - 1:
            s = upper - 1
        shifts[j] = s
        offs[j] = pos
        buf, pos = nb_append_renewal(gen, inv_beta, s, upper, buf, pos)
    offs[n_sets] = pos
    return buf


@nb.njit(cache=True)
def _accumulate(buf, offs, weights, j0, j1, ell, acc, cnt, extra, state):
    """Add sets ``j0..j1-1``; ``state`` holds (coincidence count, max slack)."""
    for j in range(j0, j1):
        w = weights[j]
        for p in range(offs[j], offs[j + 1]):
            k = buf[p]
            acc[k] += w
            c = cnt[k] + 1
            cnt[k] = c
            if c > ell:
                extra[k] += w
                if extra[k] > state[1]:
                    state[1] = extra[k]
                if c == ell + 1:
                    state[0] += 1.0


@nb.njit(cache=True)
def _eta_chunk(gen, count, inv_alpha, beta, levels, res, upper, window, scale, ell, klo, khi):
    nl = levels.shape[0]
    ni = klo.shape[0]
    L = levels[nl - 1]
    inv_q = 1.0 / (1.0 - beta)
    inv_beta = 1.0 / beta
    sups = np.zeros((count, nl, ni))
    tail = np.zeros((count, nl))
    slack = np.zeros((count, nl))
    coinc = np.zeros((count, nl))
    w12 = np.zeros((count, 2))
    acc = np.zeros(upper + 1)
    cnt = np.zeros(upper + 1, np.int32)
    extra = np.zeros(upper + 1)
    gam = np.empty(L + 1)
    shifts = np.empty(L, np.int64)
    offs = np.empty(L + 1, np.int64)
    buf = np.empty(4096, np.int64)
    weights = np.empty(L)
    state = np.zeros(2)
    for r in range(count):
        buf = _draw_eta(gen, L, inv_q, inv_beta, res, upper, window, gam, shifts, offs, buf)
        for j in range(L):
            weights[j] = scale * gam[j] ** (-inv_alpha)
        acc[:] = 0.0
        cnt[:] = 0
        extra[:] = 0.0
        state[:] = 0.0
        j = 0
        for li in range(nl):
            _accumulate(buf, offs, weights, j, levels[li], ell, acc, cnt, extra, state)
            j = levels[li]
            for i in range(ni):
                m = 0.0
                for k in range(klo[i], khi[i] + 1):
                    if acc[k] > m:
                        m = acc[k]
                sups[r, li, i] = m
            tail[r, li] = ell * scale * gam[levels[li]] ** (-inv_alpha)
            slack[r, li] = state[1]
            coinc[r, li] = state[0]
        w12[r, 0] = weights[0]
        w12[r, 1] = weights[1]
    return sups, tail, slack, coinc, w12


@nb.njit(cache=True)
def first_common(a, b, limit):
    """Smallest common element of two ascending arrays that is <= limit, else -1."""
    i = 0
    j = 0
    while i < a.shape[0] and j < b.shape[0]:
        x = a[i]
        y = b[j]
        if x > limit or y > limit:
            return -1
        if x == y:
            return x
        if x < y:
            i += 1
        else:
            j += 1
    return -1


@nb.njit(cache=True)
def _shift_pair_chunk(gen, count, beta, res, n_sets):
    """First common point of ``n_sets`` shifted sets on the unit window."""
    inv_q = 1.0 / (1.0 - beta)
    inv_beta = 1.0 / beta
    out = np.full(count, -1, np.int64)
    bufs = [np.empty(1024, np.int64) for _ in range(n_sets)]
    lens = np.zeros(n_sets, np.int64)
    for r in range(count):
        for j in range(n_sets):
            v = gen.random() ** inv_q
            s = np.int64(math.ceil(v * res))
            if s < 1:
                s = 1
            if s > res - 1:
                s = res - 1
            bufs[j], lens[j] = nb_append_renewal(gen, inv_beta, s, res, bufs[j], 0)
        common = bufs[0][: lens[0]]
        for j in range(1, n_sets):
            common = _intersect_sorted(common, bufs[j][: lens[j]])
        if common.shape[0] > 0:
            out[r] = common[0]
    return out


@nb.njit(cache=True)
def _intersect_sorted(a, b):
    out = np.empty(min(a.shape[0], b.shape[0]), np.int64)
    i = 0
    j = 0
    m = 0
    while i < a.shape[0] and j < b.shape[0]:
        if a[i] == b[j]:
            out[m] = a[i]
            m += 1
            i += 1
            j += 1
        elif a[i] < b[j]:
            i += 1
        else:
            j += 1
    return out[:m]


# -- realizations ------------------------------------------------------------

def _check_alpha(alpha):
    return _check_positive("alpha", alpha)


def _window_upper(window: float, resolution: int) -> int:
    up = Fraction(repr(float(window))) * resolution
    if up.denominator != 1:
        raise ValidationError(f"window * resolution must be an integer, got {float(up)}")
    return int(up)


def _validate(alpha, beta, ell_trunc, resolution, window=1.0):
    alpha = _check_alpha(alpha)
    beta = check_unit_open("beta", beta)
    ell = ell_beta(beta)
    if int(ell_trunc) < ell + 1:
        raise ValidationError(f"ell_trunc must be >= ell_beta + 1 = {ell + 1}, got {ell_trunc}")
    if int(resolution) < MIN_RESOLUTION:
        raise ValidationError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")
    window = float(window)
    if not window >= 1.0 or not math.isfinite(window):
        raise ValidationError(f"window must be a finite number >= 1, got {window}")
    return alpha, beta, ell, int(ell_trunc), int(resolution), window


def interior_range(interval, resolution: int, upper: int) -> tuple[int, int]:
    """Grid indices ``k`` with ``lo < k / resolution < hi``."""
    lo, hi = interval
    lo_f = Fraction(repr(float(lo))) * resolution
    hi_f = Fraction(repr(float(hi))) * resolution
    if not 0 <= lo_f < hi_f <= upper:
        raise ValidationError(f"interval {interval} must satisfy 0 <= lo < hi <= window")
    k_lo = math.floor(lo_f) + 1
    k_hi = math.ceil(hi_f) - 1
    if hi_f - lo_f < 2 or k_hi < k_lo:
        raise ValidationError(f"interval {interval} is shorter than 2/resolution")
    return k_lo, k_hi


@dataclass(frozen=True, eq=False)
class EtaRealization:
    """One truncated realization on the grid ``{0, ..., upper}`` (``upper = window * resolution``)."""

    alpha: float
    beta: float
    resolution: int
    window: float
    weights: np.ndarray
    shifted_sets: list
    tail_bound: float
    coincidence_count: int
    ell_beta: int
    values: np.ndarray = field(repr=False)
    slack: float = 0.0

    @property
    def ell_trunc(self) -> int:
        return len(self.weights)

    @property
    def upper(self) -> int:
        return len(self.values) - 1


def simulate_eta(stream: RngStream, alpha: float, beta: float, ell_trunc: int = DEFAULT_TRUNC,
                 resolution: int = DEFAULT_RESOLUTION, window: float = 1.0) -> EtaRealization:
    """Draw one truncated realization of eta on ``[0, window]``."""
    alpha, beta, ell, L, res, window = _validate(alpha, beta, ell_trunc, resolution, window)
    upper = _window_upper(window, res)
    scale = window ** ((1.0 - beta) / alpha)
    gam = np.empty(L + 1)
    shifts = np.empty(L, np.int64)
    offs = np.empty(L + 1, np.int64)
    buf = np.empty(4096, np.int64)
    buf = _draw_eta(stream.generator, L, 1.0 / (1.0 - beta), 1.0 / beta, res, upper, window,
                    gam, shifts, offs, buf)
    weights = scale * gam[:L] ** (-1.0 / alpha)
    acc = np.zeros(upper + 1)
    cnt = np.zeros(upper + 1, np.int32)
    extra = np.zeros(upper + 1)
    state = np.zeros(2)
    _accumulate(buf, offs, weights, 0, L, ell, acc, cnt, extra, state)
    sets = [GridSet(res, buf[offs[j]:offs[j + 1]].copy(), upper) for j in range(L)]
    tail = ell * scale * gam[L] ** (-1.0 / alpha)
    return EtaRealization(alpha, beta, res, window, weights, sets, float(tail),
                          int(state[0]), ell, acc, float(state[1]))


def eta_value(realization: EtaRealization, t_grid_index: int) -> float:
    """Sum of the weights of the sets containing grid point ``t_grid_index``."""
    k = int(t_grid_index)
    if not 0 <= k <= realization.upper:
        raise ValidationError(f"grid index {k} outside [0, {realization.upper}]")
    return float(realization.values[k])


def eta_sup(realization: EtaRealization, interval) -> tuple[float, float]:
    """``(sup of eta over interior grid points of interval, tail_bound)``."""
    k_lo, k_hi = interior_range(interval, realization.resolution, realization.upper)
    value = float(max(0.0, realization.values[k_lo:k_hi + 1].max()))
    return value, realization.tail_bound


# -- batch experiments -------------------------------------------------------

def _eta_task(stream, count, alpha, beta, levels, resolution, window, intervals):
    upper = _window_upper(window, resolution)
    ranges = np.array([interior_range(iv, resolution, upper) for iv in intervals], dtype=np.int64)
    sups, tail, slack, coinc, w12 = _eta_chunk(
        stream.generator, count, 1.0 / alpha, beta, np.asarray(levels, dtype=np.int64),
        resolution, upper, window, window ** ((1.0 - beta) / alpha), ell_beta(beta),
        ranges[:, 0].copy(), ranges[:, 1].copy())
    return {"sups": sups, "tail": tail, "slack": slack, "coinc": coinc, "w12": w12}


@dataclass(frozen=True)
class EtaBatch:
    """Replicated sup values: ``sups[rep, level, interval]``."""

    alpha: float
    beta: float
    levels: tuple
    intervals: tuple
    resolution: int
    window: float
    sups: np.ndarray
    tail: np.ndarray
    slack: np.ndarray
    coinc: np.ndarray
    w12: np.ndarray

    def sup(self, interval=(0.0, 1.0), level=None) -> np.ndarray:
        li = -1 if level is None else self.levels.index(level)
        return self.sups[:, li, self.intervals.index(tuple(interval))]

    def coverage_fraction(self, level=None) -> np.ndarray:
        """Per-replicate fraction of grid points covered by more than ``ell_beta`` sets."""
        li = -1 if level is None else self.levels.index(level)
        return self.coinc[:, li] / (self.window * self.resolution)


def eta_batch(alpha, beta, reps, seed, intervals=((0.0, 1.0),), ell_trunc=DEFAULT_TRUNC,
              resolution=DEFAULT_RESOLUTION, window=1.0, levels=None, threads=1, key=(1,),
              chunk=DEFAULT_CHUNK) -> EtaBatch:
    """``reps`` independent truncated realizations, summarized by their interval sups.

    ``levels`` lists nested truncation levels evaluated on the same draws
    (the realization at a lower level is the prefix of the series).
    """
    levels = tuple(sorted({int(ell_trunc)} | set(levels or ())))
    alpha, beta, ell, _, resolution, window = _validate(alpha, beta, levels[0], resolution, window)
    intervals = tuple((float(a), float(b)) for a, b in intervals)
    upper = _window_upper(window, resolution)
    for iv in intervals:
        interior_range(iv, resolution, upper)
    out = run_replicates(_eta_task, reps, seed, key, threads, chunk,
                         dict(alpha=alpha, beta=beta, levels=levels, resolution=resolution,
                              window=window, intervals=intervals))
    return EtaBatch(alpha, beta, levels, intervals, resolution, window, out["sups"], out["tail"],
                    out["slack"], out["coinc"], out["w12"])


def self_similarity_index(alpha: float, beta: float) -> float:
    """``H = (1 - beta) / alpha``."""
    return (1.0 - check_unit_open("beta", beta)) / _check_alpha(alpha)


def frechet_cdf(x, alpha):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(x > 0, np.exp(-np.power(np.maximum(x, 1e-300), -alpha)), 0.0)


def eta_tail_experiment(alpha, beta, x_grid, reps, seed, ell_trunc=DEFAULT_TRUNC,
                        resolution=DEFAULT_RESOLUTION, threads=1, batch: EtaBatch | None = None):
    """Rows ``x, x**alpha * P(eta((0,1)) > x)`` with 99% intervals plus sandwich diagnostics."""
    if reps < 10_000 and batch is None:
        raise ValidationError(f"reps must be >= 10^4 for tail estimates, got {reps}")
    for x in x_grid:
        _check_positive("x", x)
    if batch is None:
        batch = eta_batch(alpha, beta, reps, seed, ell_trunc=ell_trunc, resolution=resolution,
                          threads=threads, key=(2,))
    eta = batch.sup((0.0, 1.0))
    dist = stats.ecdf(eta)
    rows = []
    for x in x_grid:
        tr = stats.tail_ratio(dist, alpha, x)
        lower = x**alpha * (1.0 - math.exp(-(x ** -alpha)))
        rows.append({"x": float(x), "estimate": tr.estimate, "ci_low": tr.ci_low,
                     "ci_high": tr.ci_high, "frechet_lower": lower, "exceedances": tr.exceedances})
    ell = ell_beta(beta)
    w1, w2 = batch.w12[:, 0], batch.w12[:, 1]
    tail = batch.tail[:, -1]
    slack = batch.slack[:, -1]
    bound = w1 + (ell - 1) * w2 + tail
    diag = {
        "reps": int(len(eta)),
        "lower_violations": int(np.count_nonzero(eta < w1)),
        "upper_violations": int(np.count_nonzero(eta > bound)),
        "upper_violations_with_slack": int(np.count_nonzero(eta > bound + slack)),
        "replicates_with_coincidences": int(np.count_nonzero(batch.coinc[:, -1] > 0)),
        "max_coverage_fraction": float(batch.coverage_fraction().max()),
        "median_tail_bound": float(np.median(tail)),
        "max_tail_bound": float(tail.max()),
    }
    return rows, diag


def _half_window_batches(alpha, beta, reps, seed, intervals, ell_trunc, resolution, window, threads):
    a = eta_batch(alpha, beta, reps, seed, intervals, ell_trunc, resolution, window,
                  threads=threads, key=(3, 0))
    b = eta_batch(alpha, beta, reps, seed, intervals, ell_trunc, resolution, window,
                  threads=threads, key=(3, 1))
    return a, b


def selfsimilarity_experiment(alpha, beta, scale_a, reps, seed, ell_trunc=DEFAULT_TRUNC,
                              resolution=DEFAULT_RESOLUTION, threads=1):
    """Two-sample KS between ``eta((0, a))`` and ``a**H eta((0, 1))`` from independent batches."""
    if not 0.0 < scale_a <= 1.0:
        raise ValidationError(f"scale_a must lie in (0, 1], got {scale_a}")
    H = self_similarity_index(alpha, beta)
    ivs = ((0.0, float(scale_a)), (0.0, 1.0))
    a, b = _half_window_batches(alpha, beta, reps, seed, ivs, ell_trunc, resolution, 1.0, threads)
    ks = stats.ks_two_sample(a.sup(ivs[0]), scale_a**H * b.sup(ivs[1]))
    return {"H": H, "ks": ks, "threshold": stats.ks_critical(reps, reps)}


def stationarity_experiment(alpha, beta, t0, s, reps, seed, window=None, ell_trunc=DEFAULT_TRUNC,
                            resolution=DEFAULT_RESOLUTION, threads=1):
    """Two-sample KS between ``eta((t0, t0+s))`` and ``eta((0, s))`` from independent batches.

    The default window is ``[0, 2]`` (or longer when ``t0 + s > 2``).
    """
    if not (t0 >= 0 and s > 0):
        raise ValidationError("need t0 >= 0 and s > 0")
    if window is None:
        window = max(2.0, float(math.ceil(t0 + s)))
    if t0 + s > window:
        raise ValidationError(f"t0 + s = {t0 + s} exceeds the simulated window {window}")
    ivs = ((float(t0), float(t0 + s)), (0.0, float(s)))
    a, b = _half_window_batches(alpha, beta, reps, seed, ivs, ell_trunc, resolution, window, threads)
    ks = stats.ks_two_sample(a.sup(ivs[0]), b.sup(ivs[1]))
    return {"ks": ks, "threshold": stats.ks_critical(reps, reps), "window": window}


def scaling_slope(alpha, beta, reps, seed, a_grid=None, ell_trunc=DEFAULT_TRUNC,
                  resolution=DEFAULT_RESOLUTION, threads=1, batch: EtaBatch | None = None):
    """Least-squares slope of ``log median eta((0, a))`` against ``log a``."""
    if a_grid is None:
        a_grid = tuple(k / 8 for k in range(1, 9))
    ivs = tuple((0.0, float(a)) for a in a_grid)
    if batch is None:
        batch = eta_batch(alpha, beta, reps, seed, ivs, ell_trunc, resolution, threads=threads, key=(4,))
    med = np.array([np.median(batch.sup(iv)) for iv in ivs])
    slope = float(np.polyfit(np.log(a_grid), np.log(med), 1)[0])
    return {"slope": slope, "H": self_similarity_index(alpha, beta), "medians": med.tolist(),
            "a_grid": list(map(float, a_grid))}


def invariance_experiment(alpha, beta, reps, seed, window=2.0, ell_trunc=DEFAULT_TRUNC,
                          resolution=DEFAULT_RESOLUTION, threads=1):
    """Self-similarity, stationarity and scaling slope from two independent batches.

    Batch A supplies ``eta((0, 1/2))`` and the medians of ``eta((0, a))``;
    batch B supplies ``eta((0, 1))`` and ``eta((1/2, 1))``.
    """
    H = self_similarity_index(alpha, beta)
    a_grid = tuple(k / 8 for k in range(1, 9))
    ivs = tuple((0.0, a) for a in a_grid) + ((0.5, 1.0),)
    A, B = _half_window_batches(alpha, beta, reps, seed, ivs, ell_trunc, resolution, window, threads)
    ks_self = stats.ks_two_sample(A.sup((0.0, 0.5)), 0.5**H * B.sup((0.0, 1.0)))
    ks_stat = stats.ks_two_sample(B.sup((0.5, 1.0)), A.sup((0.0, 0.5)))
    slope = scaling_slope(alpha, beta, reps, seed, a_grid, batch=A)
    return {"H": H, "ks_selfsimilarity": ks_self, "ks_stationarity": ks_stat,
            "slope": slope["slope"], "medians": slope["medians"],
            "threshold": stats.ks_critical(reps, reps)}


def truncation_stability(alpha, beta, reps, seed, ell_trunc=DEFAULT_TRUNC,
                         resolution=DEFAULT_RESOLUTION, threads=1, batch: EtaBatch | None = None):
    """KS between ``eta((0,1))`` at ``ell_trunc`` and ``2 * ell_trunc`` on shared draws."""
    if batch is None:
        batch = eta_batch(alpha, beta, reps, seed, ell_trunc=ell_trunc, resolution=resolution,
                          levels=(ell_trunc, 2 * ell_trunc), threads=threads, key=(5,))
    lo, hi = batch.levels[0], batch.levels[-1]
    return {"ks": stats.ks_two_sample(batch.sup(level=lo), batch.sup(level=hi)),
            "levels": [lo, hi]}


def complete_dependence_sample(stream: RngStream, alpha: float, size: int, terms: int = 2000) -> np.ndarray:
    """``sum_j Gamma_j**(-1/alpha)`` for ``alpha < 1`` (a totally skewed alpha-stable law).

    The series is cut after ``terms`` arrivals and the remainder replaced by
    its law-of-large-numbers value ``sum_{j > terms} j**(-1/alpha)``.
    """
    alpha = _check_alpha(alpha)
    if not alpha < 1:
        raise ValidationError(f"the series sum needs alpha < 1, got {alpha}")
    p = 1.0 / alpha
    out = np.empty(size)
    step = max(1, 2_000_000 // terms)
    for i in range(0, size, step):
        m = min(step, size - i)
        gam = np.cumsum(stream.generator.standard_exponential((m, terms)), axis=1)
        out[i:i + m] = (gam ** -p).sum(axis=1)
    # Euler--Maclaurin estimate of sum_{j > terms} j**-p
    t = terms + 0.5
    out += t ** (1.0 - p) / (p - 1.0)
    return out


def interpolation_check(alpha, beta_grid, reps, seed, ell_trunc=DEFAULT_TRUNC,
                        resolution=DEFAULT_RESOLUTION, threads=1):
    """Distance of ``eta((0,1))`` to the Frechet law and to the complete-dependence law, per beta."""
    alpha = _check_alpha(alpha)
    if not alpha < 1:
        raise ValidationError(f"interpolation_check needs alpha in (0, 1), got {alpha}")
    ref = complete_dependence_sample(RngStream(seed, (6, 0)), alpha, reps)
    rows = []
    for i, beta in enumerate(beta_grid):
        batch = eta_batch(alpha, beta, reps, seed, ell_trunc=ell_trunc, resolution=resolution,
                          threads=threads, key=(6, 1, i))
        eta = batch.sup()
        rows.append({
            "beta": float(beta),
            "ks_frechet": stats.ks_one_sample(eta, lambda x: frechet_cdf(x, alpha)),
            "ks_complete": stats.ks_two_sample(eta, ref),
            "median": float(np.median(eta)),
        })
    return rows


def _shift_task(stream, count, beta, resolution, n_sets):
    first = _shift_pair_chunk(stream.generator, count, beta, resolution, n_sets)
    return {"first": first, "ok": first >= 0}


def shift_law_experiment(beta, ell, accepted, seed, resolution=DEFAULT_RESOLUTION, threads=1,
                         chunk=DEFAULT_CHUNK):
    """First point of ``ell`` independent shifted sets' intersection, given it lies in [0, 1].

    Returns the KS distance to the normalized shift law and the acceptance rate
    (an estimate of the un-normalized shift law at 1).
    """
    beta = check_unit_open("beta", beta)
    betas = [beta] * int(ell)
    shift_cdf_V_normalized(1.0, betas)  # regime check
    if int(resolution) < MIN_RESOLUTION:
        raise ValidationError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")
    out, attempted = run_until(_shift_task, "ok", accepted, seed, (7,), threads, chunk,
                               dict(beta=beta, resolution=int(resolution), n_sets=int(ell)))
    pts = out["first"][out["ok"]] / resolution
    ks = stats.ks_one_sample(pts, lambda x: shift_cdf_V_normalized(np.clip(x, 0, 1), betas))
    return {"ks": ks, "accepted": int(len(pts)), "attempted": attempted,
            "acceptance_rate": len(pts) / attempted}
