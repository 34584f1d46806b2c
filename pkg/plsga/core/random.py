"""
Keyed, counter-based random streams

Every stochastic step draws from a stream identified by the run's master seed plus a
tuple of integer keys (phase tag, generation, slot, ...), in the spirit of Random123
where a triplet of ids selects an independent sequence. Streams are therefore
reproducible and independent of the order in which work is scheduled.
"""
from __future__ import absolute_import
import secrets
from enum import IntEnum

import numpy as np


class StreamTag(IntEnum):
    """Stable first key of each phase, so streams of different phases never collide"""
    INIT = 1
    OFFSPRING = 2
    EVALUATION = 3
    REPLICATE = 4
    VERIFY = 5
    EXTERNAL = 6
    BENCHMARK = 7


def new_master_seed():
    """Draws a 63-bit master seed from system entropy"""
    return secrets.randbits(63)


def _entropy(seed):
    if isinstance(seed, (tuple, list)):
        return [int(s) for s in seed]
    return int(seed)


def stream(seed, *keys):
    """Creates the Philox generator for `seed` and the given keys.

    Args:
        seed: master seed (int) or a sequence of ints (e.g. a derived seed)
        keys: non-negative ints selecting the sub-stream

    Returns:
        A numpy Generator. Same arguments always give the same sequence.
    """
    seq = np.random.SeedSequence(_entropy(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed, *keys):
    """A child seed (sequence of ints) usable wherever a seed is accepted"""
    base = _entropy(seed)
    base = list(base) if isinstance(base, list) else [base]
    return base + [int(k) for k in keys]
