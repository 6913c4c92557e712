"""Seed and stream derivation.

Every random quantity in the package is drawn from a ``numpy.random.Generator``
derived from the experiment seed plus a tuple of integer keys. Two calls with
the same seed and keys produce the same stream regardless of process, thread
or completion order.
"""

from typing import List

import numpy as np

__all__ = ["make_stream", "split", "child_seed", "MAX_SEED"]

MAX_SEED = 2**63 - 1

# Stream keys used by the experiment drivers
PRECHECK_KEY = 0
STATIONARY_KEY = 1
TRANSIENT_KEY = 2
PERMUTATION_KEY = 3
WINDOW_KEY = 4
AUXILIARY_KEY = 5


def make_stream(seed: int, *keys: int) -> np.random.Generator:
    """Return the generator for ``(seed, *keys)``.

    Parameters
    ----------
    seed : int
        Experiment seed, non-negative.
    keys : int
        Stream identifiers, e.g. ``(STATIONARY_KEY, replicate)``.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(seq)


def split(rng: np.random.Generator, n: int) -> List[np.random.Generator]:
    """Spawn ``n`` independent child generators of ``rng``."""
    return list(rng.spawn(n))


def child_seed(rng: np.random.Generator) -> int:
    """Draw an integer seed from ``rng`` (recorded when subsampling)."""
    return int(rng.integers(0, MAX_SEED))
