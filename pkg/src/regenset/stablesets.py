"""Overshoot laws, discrete stable regenerative sets and their intersections.

A beta-stable regenerative set on [0, 1] is approximated at resolution ``n``
by the scaled range of a discrete renewal process whose return times have
tail ``P(Y > k) = k ** -beta``.  Sets are stored as sorted integer grid
points, see :class:`GridSet`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy import special

from .errors import NonIntersectingRegimeError, ValidationError
from .quadrature import gauss_kronrod
from .randkit import RngStream, _check_positive, check_unit_open, log_gamma_variates, nb_append_renewal


@dataclass(frozen=True, eq=False)
class GridSet:
    """Sorted grid points ``k`` in ``{0, ..., upper}``, read as ``k / resolution``.

    ``upper`` defaults to ``resolution`` (the unit interval); simulation
    windows ``[0, T]`` use ``upper = T * resolution``.
    """

    resolution: int
    points: np.ndarray
    upper: int | None = None

    def __post_init__(self):
        if self.resolution < 1:
            raise ValidationError(f"resolution must be >= 1, got {self.resolution}")
        if self.upper is None:
            object.__setattr__(self, "upper", int(self.resolution))
        pts = np.asarray(self.points, dtype=np.int64)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, resolution: int, points, upper: int | None = None) -> "GridSet":
        """Validated constructor: points must be strictly ascending and in range."""
        pts = np.asarray(points, dtype=np.int64).ravel()
        upper = int(resolution if upper is None else upper)
        if pts.size and (pts[0] < 0 or pts[-1] > upper):
            raise ValidationError(f"points must lie in [0, {upper}]")
        if np.any(np.diff(pts) <= 0):
            raise ValidationError("points must be strictly ascending")
        return cls(int(resolution), pts, upper)

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, k) -> bool:
        i = np.searchsorted(self.points, k)
        return bool(i < len(self.points) and self.points[i] == k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridSet):
            return NotImplemented
        return (self.resolution == other.resolution and self.upper == other.upper
                and np.array_equal(self.points, other.points))

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    def scaled(self) -> np.ndarray:
        return self.points / self.resolution

    def first_at_or_after(self, k: int):
        """Smallest point ``>= k``, or None."""
        i = np.searchsorted(self.points, k)
        return int(self.points[i]) if i < len(self.points) else None


def full_grid(resolution: int, upper: int | None = None) -> GridSet:
    upper = resolution if upper is None else upper
    return GridSet(resolution, np.arange(upper + 1, dtype=np.int64), upper)


# -- overshoot law -----------------------------------------------------------

def _check_overshoot_args(x, beta):
    return _check_positive("x", x), check_unit_open("beta", beta)


def overshoot_density(y, x: float, beta: float):
    """Density of the overshoot of level ``x`` by a beta-stable regenerative set.

    ``p(y | x) = (x / y) ** beta / ((x + y) * Gamma(beta) * Gamma(1 - beta))``
    for ``y > 0``.
    """
    x, beta = _check_overshoot_args(x, beta)
    y_arr = np.asarray(y, dtype=float)
    if np.any(~(y_arr > 0)):
        raise ValidationError("y must be positive")
    c = math.sin(math.pi * beta) / math.pi  # 1 / (Gamma(beta) Gamma(1 - beta))
    out = c * (x / y_arr) ** beta / (x + y_arr)
    return float(out) if np.ndim(out) == 0 else out


def overshoot_cdf(b, x: float, beta: float):
    """``P(B_{x,beta} <= b)`` as a regularized incomplete beta function.

    Under ``z = y / (x + y)`` the overshoot density becomes Beta(1 - beta, beta).
    """
    x, beta = _check_overshoot_args(x, beta)
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr < 0) or np.any(np.isnan(b_arr)):
        raise ValidationError("b must be non-negative")
    with np.errstate(invalid="ignore"):
        z = np.where(np.isinf(b_arr), 1.0, b_arr / (x + b_arr))
        w = np.where(np.isinf(b_arr), 0.0, x / (x + b_arr))
    # near z = 1 use the complement, since 1 - z = x / (x + b) keeps full relative precision
    out = np.where(z <= 0.5, special.betainc(1.0 - beta, beta, z), special.betaincc(beta, 1.0 - beta, w))
    return float(out) if np.ndim(out) == 0 else out


def log_overshoot_multiplier(stream: RngStream, beta: float, size: int) -> np.ndarray:
    """``log B_{1,beta}`` drawn as ``log X - log Y`` with ``X ~ Gamma(1-beta)``, ``Y ~ Gamma(beta)``."""
    log_x = log_gamma_variates(stream, 1.0 - beta, size)
    log_y = log_gamma_variates(stream, beta, size)
    return log_x - log_y


def sample_overshoot(stream: RngStream, x: float, beta: float, size: int | None = None):
    """Draw ``B_{x,beta} = x * Z / (1 - Z)`` with ``Z ~ Beta(1 - beta, beta)``."""
    x, beta = _check_overshoot_args(x, beta)
    n = 1 if size is None else int(size)
    out = x * np.exp(log_overshoot_multiplier(stream, beta, n))
    return float(out[0]) if size is None else out


# -- phi functional ----------------------------------------------------------

def phi(beta: float, quad_tol: float = 1e-12) -> float:
    """Ratio of ``int y**-beta log(y) / (1 + y)`` to ``int y**-beta / (1 + y)`` over (0, inf).

    Both integrals are folded onto (0, 1) with ``y -> 1/y`` and the endpoint
    singularities removed by ``u = y**(1-beta)`` and ``u = y**beta``.  The
    mean of ``log B_{1,beta}`` equals ``phi(beta)``.
    """
    beta = check_unit_open("beta", beta)
    q = 1.0 - beta

    def integrand(u):
        lu = np.log(u)
        r1 = 1.0 / (1.0 + u ** (1.0 / q))
        r2 = 1.0 / (1.0 + u ** (1.0 / beta))
        num = lu * (r1 / (q * q) - r2 / (beta * beta))
        den = r1 / q + r2 / beta
        return np.vstack([num, den])

    (num, den), _ = gauss_kronrod(integrand, 0.0, 1.0, abs_tol=quad_tol, max_refinements=400)
    return float(num / den)


# -- intersections -----------------------------------------------------------

def exact_beta_star(betas) -> Fraction:
    """``sum(betas) - len(betas) + 1`` in exact arithmetic on the decimal literals.

    Regime checks are sign tests at boundaries such as ``0.7 + 0.3 - 1``
    where binary floating point would misclassify.
    """
    betas = list(betas)
    return sum((Fraction(repr(float(b))) for b in betas), Fraction(0)) - len(betas) + 1


@dataclass(frozen=True)
class IntersectionSpec:
    """Two independent stable regenerative sets, the second shifted by ``a``."""

    a: float
    beta1: float
    beta2: float

    def __post_init__(self):
        _check_positive("a", self.a)
        check_unit_open("beta1", self.beta1)
        check_unit_open("beta2", self.beta2)

    @property
    def beta12(self) -> float:
        return self.beta1 + self.beta2 - 1.0

    @property
    def intersecting(self) -> bool:
        return exact_beta_star((self.beta1, self.beta2)) > 0

    def require_intersecting(self) -> None:
        if not self.intersecting:
            raise NonIntersectingRegimeError(
                f"non-intersecting regime: beta1 + beta2 - 1 = {self.beta12:.6g} <= 0, "
                "the sets meet with probability 0"
            )


@dataclass(frozen=True)
class FirstIntersectionSample:
    values: np.ndarray
    deficit: np.ndarray  # last retained term / (a + returned value)
    terms: np.ndarray  # number of overshoot terms used


MAX_OVERSHOOT_TERMS = 100_000


def sample_first_intersection(
    stream: RngStream,
    spec: IntersectionSpec,
    rel_tol: float = 1e-9,
    size: int | None = None,
    diagnostics: bool = False,
):
    """First intersection time of a ``beta1``-set with an ``a``-shifted ``beta2``-set.

    Alternating overshoots ``A_1 = a B_1``, ``A_2 = A_1 B_2``, ...  where the
    odd terms are overshoots by the ``beta1``-set and the even terms by the
    ``beta2``-set; the result is ``A_1 + A_2 + ... + A_N`` with ``N`` the
    first index such that ``A_N < rel_tol * (a + A_1 + ... + A_N)``.

    Returns an array (or float when ``size`` is None); with
    ``diagnostics=True`` a :class:`FirstIntersectionSample` instead.
    """
    spec.require_intersecting()
    if not 0.0 < rel_tol < 1.0:
        raise ValidationError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    n = 1 if size is None else int(size)
    log_a = math.log(spec.a)
    log_term = np.full(n, log_a)
    total = np.zeros(n)
    last = np.zeros(n)
    terms = np.zeros(n, dtype=np.int64)
    active = np.arange(n)
    betas = (spec.beta1, spec.beta2)
    step = 0
    while active.size:
        if step >= MAX_OVERSHOOT_TERMS:
            raise RuntimeError("overshoot series did not converge; beta12 is too close to 0")
        log_term[active] += log_overshoot_multiplier(stream, betas[step % 2], active.size)
        a_n = np.exp(log_term[active])
        total[active] += a_n
        last[active] = a_n
        terms[active] += 1
        stop = a_n < rel_tol * (spec.a + total[active])
        active = active[~stop]
        step += 1
    if diagnostics:
        return FirstIntersectionSample(total, last / (spec.a + total), terms)
    return float(total[0]) if size is None else total


def sample_regenerative_set(
    stream: RngStream, beta: float, resolution: int, upper: int | None = None, start: int = 0
) -> GridSet:
    """Scaled renewal set ``{start, start + S_1, ...}`` cut at ``upper`` (default ``resolution``)."""
    beta = check_unit_open("beta", beta)
    if int(resolution) < 1:
        raise ValidationError(f"resolution must be >= 1, got {resolution}")
    upper = int(resolution if upper is None else upper)
    buf = np.empty(64, dtype=np.int64)
    buf, pos = nb_append_renewal(stream.generator, 1.0 / beta, int(start), upper, buf, 0)
    return GridSet(int(resolution), buf[:pos].copy(), upper)


def intersect_sets(sets) -> GridSet:
    """Intersection of grid sets sharing one resolution and window."""
    sets = list(sets)
    if not sets:
        raise ValidationError("intersect_sets needs at least one set (the empty intersection is the full grid)")
    res = {s.resolution for s in sets}
    ups = {s.upper for s in sets}
    if len(res) != 1 or len(ups) != 1:
        raise ValidationError(f"resolution mismatch: {sorted(res)} / windows {sorted(ups)}")
    pts = reduce(lambda p, q: np.intersect1d(p, q, assume_unique=True), (s.points for s in sets))
    return GridSet(sets[0].resolution, pts, sets[0].upper)
