"""Counter-based random streams keyed by ``(seed, stream)``.

Every random quantity in the package is drawn from a Philox generator whose
128-bit key is built from the user seed and a stream id, so independent runs
(seeds, or sub-streams inside one run) never share state and can be executed
in any order or in parallel with identical results.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def make_rng(seed: int, stream: int = 0, block: int = 0) -> np.random.Generator:
    """Return a fresh generator for ``(seed, stream)``.

    ``block`` offsets the Philox counter so that fixed-size chunks of one stream
    can be drawn independently (results do not depend on how many chunks are used).
    """
    if seed is None:
        raise ValueError("a seed is required for random generation")
    seed = int(seed)
    stream = int(stream)
    if seed < 0 or stream < 0:
        raise ValueError(f"seed and stream must be non-negative, got {seed}, {stream}")
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    if block:
        counter = np.array([0, 0, 0, int(block) & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))
    return np.random.Generator(np.random.Philox(key=key))


# stream ids used across modules; fixed so results stay stable between versions
STREAM_PATH = 0
STREAM_DATA = 1
STREAM_WITNESS = 2
STREAM_COEFF = 3
