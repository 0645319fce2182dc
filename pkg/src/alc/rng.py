"""Seed derivation and deterministic random streams.

Every random draw in the package flows through ``mix(seed, index)``: a
64-bit avalanche mix of a master seed and a counter. No global random
state is used anywhere; a (seed, counter) pair fully determines a stream.
"""

import numpy as np

_MASK64 = (1 << 64) - 1

# splitmix64 constants
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix(seed: int, index: int) -> int:
    """Derive a 64-bit stream seed from (seed, index) via splitmix64."""
    z = (int(seed) + (int(index) + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent Generator for draw `index` of master seed `seed`."""
    return np.random.Generator(np.random.PCG64(mix(seed, index)))
