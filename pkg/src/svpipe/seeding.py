"""Deterministic named RNG sub-streams.

All randomness in the toolkit flows from one global seed through named
sub-streams ("augment", "cohort", "train", ...) so stages can be re-run
independently and in any order without changing each other's draws.
"""

import numpy as np


def substream(seed: int, *names: str) -> np.random.Generator:
    """Return a generator for the sub-stream identified by (seed, *names).

    The mapping is pure: the same seed and names always yield the same
    stream, independent of call order or process layout.
    """
    entropy = [int(seed)]
    for name in names:
        entropy.extend(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy))
