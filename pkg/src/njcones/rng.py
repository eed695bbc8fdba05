"""Counter-indexed random streams.

Sample ``i`` of a run seeded with ``seed`` always reads from the same Philox
stream, so Monte Carlo results do not depend on how samples are split across
workers.
"""
import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` of the run keyed by ``seed``."""
    if index < 0:
        raise ValueError("sample index must be non-negative")
    key = int(seed) & ((1 << 128) - 1)
    # the top counter word holds the sample index; draws advance the low words
    bitgen = np.random.Philox(key=key, counter=[0, 0, 0, int(index) & _MASK64])
    return np.random.Generator(bitgen)
