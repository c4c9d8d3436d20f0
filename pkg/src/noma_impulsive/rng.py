"""Counter-based random streams.

A stream is keyed by ``(seed, stream_id)`` and backed by Philox, so every
draw is fixed by the triple (seed, stream id, counter position) and streams
can be handed to any worker without coordination.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *stream_id: int) -> np.random.Generator:
    """Independent generator for ``(seed, *stream_id)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream_id))
    key = ss.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng: np.random.Generator | int | tuple | None) -> np.random.Generator:
    """Accept a generator, an integer seed or a ``(seed, *stream_id)`` tuple."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, tuple):
        return stream(*rng)
    return stream(0 if rng is None else rng)
