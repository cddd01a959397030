"""Deterministic random streams and the base samplers used by every simulation.

Every random quantity in the package is drawn from an :class:`RngStream`.
A stream is identified by ``(seed, stream_id)`` where ``stream_id`` is a path
of non-negative integers; child streams are obtained with
:meth:`RngStream.spawn`.  Streams are backed by the counter-based Philox
generator keyed through :class:`numpy.random.SeedSequence`, so constructing
any substream is O(1) and substreams never overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ValidationError

SEED_BITS = 64
RETURN_TIME_CAP = 2**62


class RngStream:
    """A seeded, single-owner source of randomness.

    Parameters
    ----------
    seed : int
        64-bit non-negative seed.
    stream_id : int or tuple of int
        Substream path.  Distinct paths give independent sequences.
    """

    __slots__ = ("seed", "stream_id", "generator")

    def __init__(self, seed: int, stream_id: int | tuple[int, ...] = 0):
        seed = _check_seed(seed)
        if isinstance(stream_id, (int, np.integer)):
            stream_id = (int(stream_id),)
        stream_id = tuple(int(s) for s in stream_id)
        if any(s < 0 for s in stream_id):
            raise ValidationError(f"stream_id entries must be non-negative, got {stream_id}")
        self.seed = seed
        self.stream_id = stream_id
        seq = np.random.SeedSequence(seed, spawn_key=stream_id)
        self.generator = np.random.Generator(np.random.Philox(seq))

    def spawn(self, index: int) -> "RngStream":
        """Child stream ``stream_id + (index,)``; independent of the parent's draws."""
        return RngStream(self.seed, self.stream_id + (int(index),))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2**SEED_BITS:
        raise ValidationError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def make_stream(seed: int, stream_id: int = 0) -> RngStream:
    """Return the stream identified by ``(seed, stream_id)``."""
    return RngStream(seed, stream_id)


@dataclass(frozen=True)
class ArrivalSequence:
    """Arrival times ``Gamma_1 < Gamma_2 < ...`` of a unit-rate Poisson process."""

    gammas: np.ndarray

    def __len__(self) -> int:
        return len(self.gammas)

    def weights(self, alpha: float) -> np.ndarray:
        """Frechet-type weights ``Gamma_j ** (-1/alpha)`` (descending)."""
        return self.gammas ** (-1.0 / alpha)


def sample_gamma_arrivals(stream: RngStream, count: int) -> ArrivalSequence:
    """First ``count`` arrival times of a unit-rate Poisson process."""
    if count < 1:
        raise ValidationError("count must be >= 1: an arrival sequence cannot be empty")
    gaps = stream.generator.standard_exponential(int(count))
    return ArrivalSequence(np.cumsum(gaps))


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0 or not math.isfinite(value):
        raise ValidationError(f"{name} must be a positive finite number, got {value}")
    return value


def check_unit_open(name: str, value: float) -> float:
    """Validate ``value`` lies in the open unit interval."""
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValidationError(f"{name} must lie in (0, 1), got {value}")
    return value


def log_gamma_variates(stream: RngStream, shape: float, size: int) -> np.ndarray:
    """Logarithms of ``size`` Gamma(shape, 1) variates.

    Marsaglia--Tsang squeeze/accept-reject for shape >= 1.  For shape < 1 the
    shape is boosted by one and corrected with ``U ** (1/shape)``; working in
    logs keeps tiny shapes from underflowing.
    """
    shape = _check_positive("shape", shape)
    gen = stream.generator
    boosted = shape < 1.0
    a = shape + 1.0 if boosted else shape
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)

    out = np.empty(size)
    todo = np.arange(size)
    while todo.size:
        m = todo.size
        x = gen.standard_normal(m)
        v = 1.0 + c * x
        ok = v > 0
        v = np.where(ok, v, 1.0) ** 3
        u = gen.random(m)
        x2 = x * x
        accept = ok & ((u < 1.0 - 0.0331 * x2 * x2) | (np.log(u) < 0.5 * x2 + d * (1.0 - v + np.log(v))))
        out[todo[accept]] = math.log(d) + np.log(v[accept])
        todo = todo[~accept]
    if boosted:
        # -E/shape == log(U ** (1/shape)) with U uniform
        out -= gen.standard_exponential(size) / shape
    return out


def sample_gamma(stream: RngStream, shape: float, size: int | None = None):
    """Gamma(shape, 1) variates; a float when ``size`` is None."""
    n = 1 if size is None else int(size)
    draws = np.exp(log_gamma_variates(stream, shape, n))
    return float(draws[0]) if size is None else draws


def sample_beta(stream: RngStream, p: float, q: float, size: int | None = None):
    """Beta(p, q) variates built as ``X / (X + Y)`` from two Gamma variates."""
    p = _check_positive("p", p)
    q = _check_positive("q", q)
    n = 1 if size is None else int(size)
    log_x = log_gamma_variates(stream, p, n)
    log_y = log_gamma_variates(stream, q, n)
    # X/(X+Y) = 1/(1 + exp(logY - logX)), stable for tiny shapes
    z = 1.0 / (1.0 + np.exp(log_y - log_x))
    return float(z[0]) if size is None else z


def sample_return_time(stream: RngStream, beta: float, size: int | None = None):
    """Integer return times with exact tail ``P(Y > n) = n ** -beta``.

    ``Y = ceil(U ** (-1/beta))`` written as ``ceil(exp(E / beta))`` with ``E``
    a unit exponential.  Values beyond ``2**62`` are clipped there; the
    clipping only affects events of probability below ``2**(-62*beta)``.
    """
    beta = check_unit_open("beta", beta)
    n = 1 if size is None else int(size)
    z = stream.generator.standard_exponential(n) / beta
    y = np.full(n, RETURN_TIME_CAP, dtype=np.int64)
    small = z < math.log(RETURN_TIME_CAP)
    y[small] = np.ceil(np.exp(z[small])).astype(np.int64)
    return int(y[0]) if size is None else y


@nb.njit(cache=True)
def nb_return_time(gen, inv_beta, log_cap, cap):
    """Single return time inside compiled kernels; values above ``cap`` become ``cap``."""
    z = gen.standard_exponential() * inv_beta
    if z >= log_cap:
        return cap
    y = np.int64(math.ceil(math.exp(z)))
    return cap if y > cap else y


@nb.njit(cache=True)
def nb_append_renewal(gen, inv_beta, start, upper, buf, pos):
    """Append ``start, start+Y1, start+Y1+Y2, ...`` (all <= upper) to ``buf``.

    Returns the possibly reallocated buffer and the new fill position.
    """
    cap = upper + 1
    log_cap = math.log(cap) if cap > 1 else 0.0
    k = start
    while k <= upper:
        if pos == buf.shape[0]:
            grown = np.empty(2 * buf.shape[0] + 16, np.int64)
            grown[:pos] = buf[:pos]
            buf = grown
        buf[pos] = k
        pos += 1
        k += nb_return_time(gen, inv_beta, log_cap, cap)
    return buf, pos
