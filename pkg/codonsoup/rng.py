"""
Deterministic random streams.

Every draw comes from numpy's PCG64 bit generator seeded through a
`numpy.random.SeedSequence` whose entropy is the run's 64-bit `rng_seed` and
whose spawn key names the stream: (SOUP,) for the initial soup, (BROWNIAN, step)
for the kicks of one step. Codon i takes draws 3i..3i+2 of its step's stream, so
its kick depends only on (rng_seed, step, i). Replays are bit-identical for a
given numpy PCG64 implementation; other generators are not expected to agree.
"""

from enum import IntEnum

import numpy as np

BIT_GENERATOR = "PCG64"
MAX_SEED = 2**64 - 1


class Stream(IntEnum):
    SOUP = 0
    BROWNIAN = 1


def generator(seed: int, stream: Stream, *key: int) -> np.random.Generator:
    """Return the generator of `stream` for `seed`, further keyed by `key`."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(int(stream), *key))
    return np.random.Generator(np.random.PCG64(sequence))


def brownian_kicks(seed: int, step: int, n: int) -> np.ndarray:
    """Return an (n, 3) array of uniform draws in [-1, 1), one row per codon id."""
    if n == 0:
        return np.zeros((0, 3))
    return generator(seed, Stream.BROWNIAN, step).uniform(-1.0, 1.0, size=(n, 3))


def soup_draws(seed: int, n: int) -> list[list[float]]:
    """Return `n` rows of (x, y, angle) fractions in [0, 1) for placing free codons."""
    if n == 0:
        return []
    return generator(seed, Stream.SOUP).random((n, 3)).tolist()
