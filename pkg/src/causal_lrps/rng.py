"""Counter-based random streams.

Every stochastic routine in the package draws from a Philox bit generator
keyed by (seed, stream). Philox is counter-based, so a (seed, stream) pair
yields the same draws on every platform and the streams never collide.
Seed 0 is reserved for documentation examples.
"""

import numpy as np

STREAM_GRAPH = 0
STREAM_WEIGHTS = 1
STREAM_NOISE = 2
STREAM_SAMPLES = 3
STREAM_FOLDS = 4
STREAM_BASELINE = 5
STREAM_TEST = 9


def stream(seed: int, which: int = 0) -> np.random.Generator:
    """Return the generator for stream `which` of the given seed."""
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(which)])
    return np.random.Generator(np.random.Philox(key=key))
