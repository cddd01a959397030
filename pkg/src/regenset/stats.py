"""Empirical distributions, Kolmogorov--Smirnov distances and tail ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError

# asymptotic Kolmogorov quantile c(alpha) = sqrt(-ln(alpha/2)/2)
KS_C = {0.05: 1.3581015157406195, 0.01: 1.6276236307187293, 0.001: 1.9494746035204051}
WILSON_Z99 = 2.5758293035489004


@dataclass(frozen=True)
class EmpiricalDistribution:
    samples: np.ndarray

    @property
    def count(self) -> int:
        return len(self.samples)

    def __call__(self, x):
        """Right-continuous ECDF evaluated at ``x``."""
        return np.searchsorted(self.samples, x, side="right") / self.count

    def survival(self, x) -> float:
        return 1.0 - self(x)

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.samples, q))


def ecdf(samples) -> EmpiricalDistribution:
    arr = np.sort(np.asarray(samples, dtype=float).ravel())
    if arr.size == 0:
        raise ValidationError("ecdf needs at least one sample")
    if np.isnan(arr).any():
        raise ValidationError("ecdf samples contain NaN")
    return EmpiricalDistribution(arr)


def _as_dist(d) -> EmpiricalDistribution:
    return d if isinstance(d, EmpiricalDistribution) else ecdf(d)


def ks_one_sample(dist, cdf: Callable) -> float:
    """Sup-distance between an ECDF and a continuous CDF (order-statistic formula)."""
    dist = _as_dist(dist)
    x = dist.samples
    n = dist.count
    f = np.asarray(cdf(x), dtype=float)
    if f.shape != x.shape:
        f = np.broadcast_to(f, x.shape)
    if np.any((f < -1e-12) | (f > 1 + 1e-12)):
        raise ValidationError("cdf values must lie in [0, 1]")
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


def ks_two_sample(a, b) -> float:
    """Sup-distance between two ECDFs."""
    a, b = _as_dist(a), _as_dist(b)
    grid = np.concatenate([a.samples, b.samples])
    return float(np.max(np.abs(a(grid) - b(grid))))


def ks_critical(m: int, n: int | None = None, level: float = 0.01) -> float:
    """Asymptotic KS critical value; one-sample when ``n`` is None."""
    c = KS_C[level]
    if n is None:
        return c / math.sqrt(m)
    return c * math.sqrt((m + n) / (m * n))


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z99) -> tuple[float, float]:
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class TailRatio:
    x: float
    estimate: float
    ci_low: float
    ci_high: float
    exceedances: int
    count: int


def tail_ratio(dist, alpha: float, x: float) -> TailRatio:
    """``x**alpha * P(X > x)`` with a 99% Wilson interval scaled by ``x**alpha``."""
    if not x > 0:
        raise ValidationError(f"x must be positive, got {x}")
    if not alpha > 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    dist = _as_dist(dist)
    k = int(dist.count - np.searchsorted(dist.samples, x, side="right"))
    scale = x**alpha
    lo, hi = wilson_interval(k, dist.count)
    return TailRatio(x, scale * k / dist.count, scale * lo, scale * hi, k, dist.count)


def binomial_band(p: float, trials: int, z: float = 3.2905) -> float:
    """Half-width of a normal-approximation band for a binomial proportion (default 99.9%)."""
    return z * math.sqrt(p * (1 - p) / trials)
