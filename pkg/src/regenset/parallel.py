"""Replicate-level parallelism with thread-count-independent results.

Work is cut into fixed-size chunks; chunk ``c`` always draws from the
substream ``stream_key + (c,)`` of the run seed, and chunk outputs are
concatenated in chunk order.  The worker count therefore only changes
wall-clock time, never the numbers.
"""

from __future__ import annotations

import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

from .errors import ValidationError
from .randkit import RngStream

DEFAULT_CHUNK = 2000


def default_threads() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return max(1, os.cpu_count() or 1)


def _run_chunk(task, seed, key, c, count, params):
    return task(RngStream(seed, key + (c,)), count, **params)


def _merge(parts):
    if not parts:
        return {}
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def run_chunks(task: Callable, seed: int, key, counts, threads: int = 1, params=None, start: int = 0):
    """Run ``task(stream, count, **params)`` for chunk indices ``start, start+1, ...``.

    ``task`` returns a dict of arrays whose first axis has length ``count``.
    """
    params = params or {}
    key = tuple(key)
    jobs = [(start + i, int(c)) for i, c in enumerate(counts)]
    if threads is None or threads < 1:
        raise ValidationError(f"threads must be >= 1, got {threads}")
    if threads == 1 or len(jobs) == 1:
        parts = [_run_chunk(task, seed, key, c, n, params) for c, n in jobs]
    else:
        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs)), mp_context=ctx) as ex:
            futs = [ex.submit(_run_chunk, task, seed, key, c, n, params) for c, n in jobs]
            parts = [f.result() for f in futs]
    return _merge(parts)


def chunk_counts(reps: int, chunk: int = DEFAULT_CHUNK):
    if reps < 1:
        raise ValidationError(f"reps must be >= 1, got {reps}")
    full, rest = divmod(int(reps), int(chunk))
    return [chunk] * full + ([rest] if rest else [])


def run_replicates(task: Callable, reps: int, seed: int, key, threads: int = 1,
                   chunk: int = DEFAULT_CHUNK, params=None):
    """``reps`` replicates of ``task`` split into fixed-size chunks."""
    return run_chunks(task, seed, key, chunk_counts(reps, chunk), threads, params)


def run_until(task: Callable, accept_field: str, needed: int, seed: int, key, threads: int = 1,
              chunk: int = DEFAULT_CHUNK, params=None, max_chunks: int = 100_000):
    """Run chunks until ``needed`` replicates have ``accept_field`` true.

    Chunks are launched in rounds of ``max(threads, 4)``; the first ``needed``
    accepted replicates in chunk order are kept, so the result does not depend
    on ``threads``.  Returns ``(merged, attempted)`` where ``attempted`` counts
    replicates up to and including the last kept one.
    """
    parts = []
    accepted = 0
    c = 0
    per_round = max(threads, 4)
    while accepted < needed:
        if c >= max_chunks:
            raise RuntimeError(f"acceptance too rare: {accepted} accepted after {c} chunks")
        out = run_chunks(task, seed, key, [chunk] * per_round, threads, params, start=c)
        c += per_round
        parts.append(out)
        accepted += int(np.count_nonzero(out[accept_field]))
    merged = _merge(parts)
    ok = np.flatnonzero(merged[accept_field])
    last = ok[needed - 1]
    trimmed = {k: v[: last + 1] for k, v in merged.items()}
    return trimmed, int(last + 1)
