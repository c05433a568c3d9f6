"""Deterministic trial fan-out.

Work is cut into fixed-size chunks of consecutive trial indices.  Chunk
boundaries depend only on the trial count, never on the worker count, and
per-trial randomness is keyed by absolute trial index, so any worker count
produces identical results.  Chunk outputs are reduced in chunk order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 512


def trial_stream(master_seed: int, trial: int) -> np.random.Generator:
    """Counter-based random stream for one absolute trial index."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial,))
    return np.random.Generator(np.random.Philox(seq))


def run_chunked(trials: int, workers: int, chunk_fn, chunk: int = CHUNK) -> list:
    """Apply ``chunk_fn(start, count)`` over fixed chunks, in order.

    Returns the per-chunk results as a list ordered by chunk start.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    spans = [(s, min(chunk, trials - s)) for s in range(0, trials, chunk)]
    if workers <= 1 or len(spans) == 1:
        return [chunk_fn(s, c) for s, c in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda span: chunk_fn(*span), spans))
