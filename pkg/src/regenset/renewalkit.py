"""Exact discrete renewal computations for the ``F(n) = n**-beta`` family.

Renewal masses ``u(n) = P(n is a renewal epoch)``, intersections of
independent renewal processes, and the exact law of the first common renewal
of two chains started at different times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ValidationError
from .randkit import check_unit_open


@dataclass(frozen=True)
class RenewalLaw:
    """Return-time law with tail ``F(n) = n**-beta`` for ``n >= 1`` and ``F(0) = 1``."""

    beta: float

    def __post_init__(self):
        check_unit_open("beta", self.beta)

    def tail(self, n):
        n = np.asarray(n, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(n >= 1, np.power(np.maximum(n, 1.0), -self.beta), 1.0)
        return float(out) if out.ndim == 0 else out

    def masses(self, n_max: int) -> np.ndarray:
        """``p[0..n_max]`` with ``p[n] = F(n-1) - F(n)``; ``p[0] = p[1] = 0``."""
        k = np.arange(n_max + 1, dtype=float)
        p = np.zeros(n_max + 1)
        if n_max >= 2:
            # F(k-1) - F(k) = (k-1)**-b * (1 - (1 - 1/k)**b), written without cancellation
            kk = k[2:]
            p[2:] = (kk - 1.0) ** -self.beta * -np.expm1(self.beta * np.log1p(-1.0 / kk))
        return p


def _check_nmax(n_max):
    if int(n_max) < 1:
        raise ValidationError(f"n_max must be >= 1, got {n_max}")
    return int(n_max)


@nb.njit(cache=True)
def _renewal_recursion(p, n_max):
    # u(n) = sum_{k=1}^{n} p(k) u(n-k); rev holds u in reversed order so each
    # step is one contiguous dot product
    u = np.zeros(n_max + 1)
    rev = np.zeros(n_max + 1)
    u[0] = 1.0
    rev[n_max] = 1.0
    for n in range(1, n_max + 1):
        # rev[n_max - m] = u(m) for m < n;  sum_k p[k] u[n-k]
        s = np.dot(p[1:n + 1], rev[n_max - n + 1:n_max + 1])
        u[n] = s
        rev[n_max - n] = s
    return u


def renewal_mass_function(law: RenewalLaw, n_max: int) -> np.ndarray:
    """``u(0..n_max)`` from ``u(0) = 1`` and ``u(n) = sum_{k=1}^{n} p_k u(n-k)``."""
    n_max = _check_nmax(n_max)
    return _renewal_recursion(law.masses(n_max), n_max)


@nb.njit(cache=True)
def _deconvolve(u, n_max):
    # p(n) = u(n) - sum_{k=1}^{n-1} p(k) u(n-k);  rev[n_max - m] = u(m)
    p = np.zeros(n_max + 1)
    rev = u[::-1].copy()
    for n in range(1, n_max + 1):
        p[n] = u[n] - np.dot(p[1:n], rev[n_max - n + 1:n_max])
    return p


@nb.njit(cache=True)
def _first_passage(g, ustar, n_max):
    # f(t) = g(t) - sum_{s<t} f(s) u*(t-s);  rev[n_max - m] = u*(m)
    f = np.zeros(n_max + 1)
    rev = ustar[::-1].copy()
    for t in range(n_max + 1):
        f[t] = g[t] - np.dot(f[:t], rev[n_max - t:n_max])
    return f


def intersection_renewal(u_lists):
    """Renewal quantities of the intersection of independent renewal processes.

    Returns ``(u_star, p_star, F_bar_star)`` with ``u_star = prod u_q`` and
    ``p_star`` recovered by deconvolution.
    """
    arrs = [np.asarray(u, dtype=float) for u in u_lists]
    if not arrs:
        raise ValidationError("need at least one renewal mass array")
    if len({len(a) for a in arrs}) != 1:
        raise ValidationError(f"length mismatch: {[len(a) for a in arrs]}")
    n_max = len(arrs[0]) - 1
    if n_max < 1:
        raise ValidationError("arrays must have length >= 2")
    u_star = np.prod(np.vstack(arrs), axis=0)
    p_star = _deconvolve(u_star, n_max)
    p_star[0] = 0.0
    F_bar = 1.0 - np.cumsum(p_star)
    return u_star, p_star, F_bar


def first_simultaneous_renewal_cdf(law1: RenewalLaw, law2: RenewalLaw, offset: int, n_max: int):
    """Exact CDF of the first common epoch of chain 1 started at ``-offset`` and chain 2 at 0.

    ``f(t) = u1(t + offset) u2(t) - sum_{s<t} f(s) u1(t-s) u2(t-s)``: every
    joint renewal at ``t`` is reached through a first one at ``s <= t``
    followed by a fresh joint renewal process.  Returns ``F[0..n_max]``.
    """
    n_max = _check_nmax(n_max)
    offset = int(offset)
    if offset < 0 or offset > n_max:
        raise ValidationError(f"offset must lie in [0, n_max], got {offset}")
    u1 = renewal_mass_function(law1, n_max + offset)
    u2 = renewal_mass_function(law2, n_max)
    g = u1[offset:offset + n_max + 1] * u2
    f = _first_passage(g, u1[:n_max + 1] * u2, n_max)
    return np.minimum(np.cumsum(f), 1.0)


def _marginal_step(r, pk):
    out = np.zeros_like(r)
    out[:-1] += r[1:]
    out += r[0] * pk[1:]
    return out


def _joint_step(P, p1, p2):
    out = np.zeros_like(P)
    out[:-1, :-1] += P[1:, 1:]
    # a chain at residual 0 draws a fresh return time k, i.e. residual k - 1
    out[:, :-1] += np.outer(p1[1:], P[0, 1:])
    out[:-1, :] += np.outer(P[1:, 0], p2[1:])
    out += P[0, 0] * np.outer(p1[1:], p2[1:])
    return out


def brute_force_first_common(law1: RenewalLaw, law2: RenewalLaw, offset: int, horizon: int,
                             skip_origin: bool = False):
    """First-common-epoch masses by enumerating the pair of residual times.

    State ``(a, b)`` holds the time until each chain's next epoch; a step
    either decrements it or, at 0, draws a fresh return time.  Exact for
    horizons of a few hundred.  Returns ``(joint, first)``: ``joint[t]`` is
    the probability both chains have an epoch at ``t`` and ``first[t]`` that
    the first such ``t`` (after 0 when ``skip_origin``) is ``t``.
    """
    H = int(horizon)
    offset = int(offset)
    if H < 1 or offset < 0:
        raise ValidationError("need horizon >= 1 and offset >= 0")
    cap = H + offset + 2
    p1 = law1.masses(cap + 1)
    p2 = law2.masses(cap + 1)
    r1 = np.zeros(cap + 1)
    r1[0] = 1.0
    for _ in range(offset):
        r1 = _marginal_step(r1, p1)
    r2 = np.zeros(cap + 1)
    r2[0] = 1.0
    P = np.outer(r1, r2)
    joint = np.zeros(H + 1)
    first = np.zeros(H + 1)
    for t in range(H + 1):
        joint[t] = r1[0] * r2[0]
        if not (skip_origin and t == 0):
            first[t] = P[0, 0]
            P[0, 0] = 0.0
        P = _joint_step(P, p1, p2)
        r1 = _marginal_step(r1, p1)
        r2 = _marginal_step(r2, p2)
    return joint, first


def doney_ratio(beta: float, n_max: int) -> np.ndarray:
    """``n p_n / F(n)`` for ``n = 1..n_max`` (``p_1 = 0``)."""
    law = RenewalLaw(beta)
    n_max = _check_nmax(n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    return n * law.masses(n_max)[1:] / law.tail(n)


def karamata_ratio(beta: float, u: np.ndarray, n: int) -> float:
    """``u(n) Gamma(beta) Gamma(1-beta) n**(1-beta)``."""
    return float(u[n] * math.gamma(beta) * math.gamma(1.0 - beta) * n ** (1.0 - beta))


def cumulative_karamata_ratio(beta: float, u: np.ndarray, n: int) -> float:
    """``U(n) Gamma(1+beta) Gamma(1-beta) / n**beta`` with ``U(n) = u(0) + ... + u(n)``."""
    return float(math.fsum(u[: n + 1]) * math.gamma(1.0 + beta) * math.gamma(1.0 - beta) / n**beta)


def intersection_tail_constant(betas) -> float:
    """``prod Gamma(b_q) Gamma(1-b_q) / (Gamma(b*) Gamma(1-b*))``."""
    betas = list(betas)
    bs = sum(betas) - len(betas) + 1
    if not bs > 0:
        raise ValidationError(f"beta* = {bs} must be positive")
    num = math.prod(math.gamma(b) * math.gamma(1.0 - b) for b in betas)
    return num / (math.gamma(bs) * math.gamma(1.0 - bs))


def renewal_asymptotics(betas=(0.6, 0.8), n: int = 100_000, pair_beta: float = 0.8):
    """Exact ratios against the renewal asymptotics at horizon ``n``."""
    rows = []
    cache = {}
    for b in sorted(set(betas) | {pair_beta}):
        cache[b] = renewal_mass_function(RenewalLaw(b), n)
    for b in betas:
        rows.append({"quantity": "u", "beta": b, "n": n, "ratio": karamata_ratio(b, cache[b], n)})
        rows.append({"quantity": "U", "beta": b, "n": n,
                     "ratio": cumulative_karamata_ratio(b, cache[b], n)})
    u = cache[pair_beta]
    _, p_star, F_star = intersection_renewal([u, u])
    bs = 2 * pair_beta - 1
    L = intersection_tail_constant([pair_beta, pair_beta])
    rows.append({"quantity": "F_star", "beta": pair_beta, "n": n, "ratio": float(F_star[n] * n**bs / L)})
    conservation = float(np.max(np.abs(np.cumsum(p_star) + F_star - 1.0)))
    return rows, conservation
