"""Counter-based seed derivation.

Every stochastic unit (a tree, a trial, a fold) gets its own seed computed
from the master seed and the unit's coordinates, so results never depend on
execution order or thread count.
"""
import numpy as np


def derive_seed(master, *key):
    """64-bit non-zero seed for the unit identified by ``key``."""
    words = [int(master) & 0xFFFFFFFFFFFFFFFF]
    for k in key:
        if isinstance(k, str):
            words.extend(k.encode("utf-8"))
            words.append(0x10000)
        else:
            words.append(int(k))
    state = np.random.SeedSequence(words).generate_state(2, np.uint32)
    seed = (int(state[0]) << 32) | int(state[1])
    return seed or 0x9E3779B97F4A7C15


def derive_rng(master, *key):
    return np.random.default_rng(derive_seed(master, *key))
