"""
Counter-based random streams.

Every draw in varheat comes from a Philox generator whose key is derived from
the address (seed, replicate, draw). Two calls with the same address return
the same numbers no matter which thread runs first or in which order the
replicates are scheduled.
"""
import logging

import numpy as np

logger = logging.getLogger(__name__)

# Named draw addresses inside one replicate.
PRIMARY_NOISE = 0
INDEPENDENT_COPY = 1
PERTURBATION = 2
SUBGRID_CLOSURE = 3

# Replicate index reserved for bootstrap resampling of experiment reports.
BOOTSTRAP_REPLICATE = 2**32 - 1


def stream(seed: int, replicate: int = 0, draw: int = 0) -> np.random.Generator:
    """
    Returns the generator addressed by (seed, replicate, draw).

    Args:
        seed: Base seed of the run (non-negative, up to 64 bits).
        replicate: Replicate index.
        draw: Named sub-stream inside the replicate.
    """
    if seed < 0 or replicate < 0 or draw < 0:
        raise ValueError(f"stream address must be non-negative, got ({seed}, {replicate}, {draw})")
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate), int(draw)))
    key = seq.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
