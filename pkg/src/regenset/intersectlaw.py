"""Closed-form laws for intersections of stable regenerative sets.

All integrals are evaluated by adaptive Gauss--Kronrod after power
substitutions that turn the algebraic endpoint singularities into bounded
integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NonIntersectingRegimeError, ValidationError
from .quadrature import gauss_kronrod
from .randkit import _check_positive, check_unit_open
from .stablesets import IntersectionSpec, exact_beta_star


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    max_refinements: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValidationError(f"abs_tol must be positive, got {self.abs_tol}")
        if int(self.max_refinements) < 1:
            raise ValidationError(f"max_refinements must be >= 1, got {self.max_refinements}")


DEFAULT_QUAD = QuadratureConfig()


def _pd_unit(s, beta1, beta2, cfg):
    """``P(D <= x | a)`` as a function of ``s = a / x`` (array), for valid betas."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    b12 = beta1 + beta2 - 1.0
    c = math.sin(math.pi * b12) / math.pi
    e1 = 1.0 - beta1
    sc = s[:, None]

    # (0, 1/2]: y = t**(1/b12) / 2
    left_k = 0.5**b12 / b12

    def left(t):
        y = 0.5 * t ** (1.0 / b12)
        return left_k * (y / (sc + y)) ** e1 * (1.0 - y) ** (-b12)

    # [1/2, 1): 1 - y = t**(1/(1-b12)) / 2
    right_k = 0.5 ** (1.0 - b12) / (1.0 - b12)

    def right(t):
        w = 0.5 * t ** (1.0 / (1.0 - b12))
        y = 1.0 - w
        return right_k * (sc + y) ** (beta1 - 1.0) * y ** (beta2 - 1.0)

    tol = 0.5 * cfg.abs_tol
    lv, _ = gauss_kronrod(left, 0.0, 1.0, tol, cfg.max_refinements)
    rv, _ = gauss_kronrod(right, 0.0, 1.0, tol, cfg.max_refinements)
    return np.clip(c * (np.asarray(lv) + np.asarray(rv)), 0.0, 1.0)


def _check_regime(beta1, beta2):
    check_unit_open("beta1", beta1)
    check_unit_open("beta2", beta2)
    if exact_beta_star((beta1, beta2)) <= 0:
        raise NonIntersectingRegimeError(
            f"non-intersecting regime: beta1 + beta2 - 1 <= 0 for ({beta1}, {beta2})"
        )


def intersection_cdf(x, a: float, beta1: float, beta2: float, cfg: QuadratureConfig = DEFAULT_QUAD):
    """CDF of the first intersection time of a ``beta1``-set and an ``a``-shifted ``beta2``-set.

    ``sin(pi b12)/pi * int_0^1 (a/x + y)**(beta1-1) y**(beta2-1) (1-y)**(-b12) dy``
    with ``b12 = beta1 + beta2 - 1 > 0``.  ``x`` may be an array; ``x = inf``
    maps to 1.
    """
    _check_regime(beta1, beta2)
    a = _check_positive("a", a)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0)):
        raise ValidationError("x must be positive")
    flat = x_arr.ravel()
    out = np.ones(flat.shape)
    fin = np.isfinite(flat)
    if fin.any():
        out[fin] = _pd_unit(a / flat[fin], beta1, beta2, cfg)
    out = out.reshape(x_arr.shape)
    return float(out) if out.ndim == 0 else out


def recursion_residual(x: float, beta1: float, beta2: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Residual of the one-step renewal identity for the first intersection time.

    ``| P^{b1,b2}(x | 1) - int_0^x p_B^{b1}(y | 1) P^{b2,b1}(x - y | y) dy |``
    where ``p_B`` is the overshoot density.  The outer integral is split at
    ``x/2``; ``y = (x/2) t**(1/(1-b1))`` absorbs the ``y**-b1`` singularity
    and ``x - y = (x/2) t**(1/(1-b2))`` smooths the vanishing inner CDF.
    """
    _check_regime(beta1, beta2)
    x = _check_positive("x", x)
    c1 = math.sin(math.pi * beta1) / math.pi
    h = 0.5 * x
    e1, e2 = 1.0 - beta1, 1.0 - beta2
    inner_cfg = QuadratureConfig(cfg.abs_tol / 10.0, cfg.max_refinements)

    def inner(y, w):
        # inner CDF at level w = x - y with shift y
        return _pd_unit(y / w, beta2, beta1, inner_cfg)

    def left(t):
        y = h * t ** (1.0 / e1)
        # p_B(y|1) dy = c1 y**-b1/(1+y) dy  and  y**-b1 dy = h**e1/e1 dt
        return c1 * h**e1 / e1 / (1.0 + y) * inner(y, x - y)

    def right(t):
        w = h * t ** (1.0 / e2)
        y = x - w
        dy = h / e2 * t ** (beta2 / e2)
        return c1 * y ** (-beta1) / (1.0 + y) * dy * inner(y, w)

    tol = 0.25 * cfg.abs_tol
    lv, _ = gauss_kronrod(left, 0.0, 1.0, tol, cfg.max_refinements)
    rv, _ = gauss_kronrod(right, 0.0, 1.0, tol, cfg.max_refinements)
    direct = float(_pd_unit(np.array([1.0 / x]), beta1, beta2, cfg)[0])
    return abs(direct - (lv + rv))


def ell_beta(beta: float) -> int:
    """Largest integer ``l`` with ``l < 1 / (1 - beta)``, in exact arithmetic."""
    beta = check_unit_open("beta", beta)
    q = 1 / (1 - Fraction(repr(beta)))
    return math.ceil(q) - 1


def beta_star(betas) -> float:
    """``sum(betas) - (len(betas) - 1)``."""
    betas = list(betas)
    if not betas:
        raise ValidationError("beta_star needs a nonempty list of betas")
    for b in betas:
        check_unit_open("beta", b)
    return float(exact_beta_star(betas))


def shift_cdf_V(x, betas) -> float:
    """``P(V <= x)`` on [0, 1] for the first point of an l-fold shifted intersection.

    ``x**(1 - b*) * prod Gamma(b_j) Gamma(2 - b_j) / (Gamma(b*) Gamma(2 - b*))``
    with ``b* = sum(betas) - l + 1``.  The value at 1 is generally below 1:
    the remaining mass sits beyond 1 and is not described here.
    """
    betas = list(betas)
    if not betas:
        raise ValidationError("shift_cdf_V needs a nonempty list of betas")
    for b in betas:
        check_unit_open("beta", b)
    if exact_beta_star(betas) <= 0:
        raise NonIntersectingRegimeError(
            f"non-intersecting regime: beta* = {beta_star(betas):.6g} <= 0 for {len(betas)} sets"
        )
    bs = beta_star(betas)
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0) | (x_arr > 1)) or np.any(np.isnan(x_arr)):
        raise ValidationError("x must lie in [0, 1]")
    const = math.prod(math.gamma(b) * math.gamma(2.0 - b) for b in betas)
    const /= math.gamma(bs) * math.gamma(2.0 - bs)
    out = const * x_arr ** (1.0 - bs)
    return float(out) if out.ndim == 0 else out


def shift_cdf_V_normalized(x, betas):
    """``shift_cdf_V(x) / shift_cdf_V(1)``, the law of V given ``V <= 1``."""
    return shift_cdf_V(x, betas) / shift_cdf_V(1.0, betas)


__all__ = [
    "QuadratureConfig",
    "IntersectionSpec",
    "intersection_cdf",
    "recursion_residual",
    "ell_beta",
    "beta_star",
    "shift_cdf_V",
    "shift_cdf_V_normalized",
]
