"""Counter-based random streams.

Every random draw in a run comes from a stream keyed by the master seed and
an integer path ``(purpose, *counters)``. Streams are Philox generators
seeded through :class:`numpy.random.SeedSequence`, so a stream never depends
on how many numbers any other stream consumed.
"""

from __future__ import annotations

import numpy as np

# stream purposes
INIT = 0
VARIATION = 1
RANDOM_SEARCH = 2


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for ``(seed, *key)``.

    ``stream(7, VARIATION, 12)`` is the stream for iteration 12's offspring;
    callers split it further with :meth:`numpy.random.Generator.spawn`.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
