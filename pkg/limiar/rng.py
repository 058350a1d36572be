"""Reproducible random streams.

All randomness flows through generators built here. A stream is identified by
``(master_seed, purpose, index)`` and backed by the counter-based Philox bit
generator, so replica ``i`` sees the same numbers no matter how many worker
threads run or in which order replicas are scheduled.
"""

from enum import IntEnum

import numpy as np


class StreamPurpose(IntEnum):
    """Namespaces for derived streams; never reuse a value."""

    REPLICA = 0
    PILOT = 1
    REALISATION = 2
    GIANT = 3


def stream(master_seed: int, purpose: StreamPurpose, index: int = 0) -> np.random.Generator:
    """Return the generator for one ``(master_seed, purpose, index)`` triple.

    Args:
        master_seed: Non-negative experiment seed.
        purpose: What the stream is used for.
        index: Replica / realisation index within the purpose.

    Returns:
        numpy.random.Generator: A fresh generator over ``Philox``.
    """
    if master_seed < 0 or index < 0:
        raise ValueError("seeds and stream indices must be non-negative")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(purpose), int(index)))
    return np.random.Generator(np.random.Philox(seq))
