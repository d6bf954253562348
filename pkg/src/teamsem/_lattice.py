"""Boolean-lattice helpers over bitmask-indexed arrays."""

from __future__ import annotations

import numpy as np


def superset_any(flags: np.ndarray, nbits: int) -> np.ndarray:
    """``out[m]`` is true iff ``flags[m']`` for some ``m' ⊇ m``."""
    out = np.asarray(flags, dtype=bool).copy()
    if out.shape != (1 << nbits,):
        raise ValueError("flags must have length 2**nbits")
    for i in range(nbits):
        view = out.reshape(-1, 2, 1 << i)
        view[:, 0, :] |= view[:, 1, :]
    return out


def subset_any(flags: np.ndarray, nbits: int) -> np.ndarray:
    """``out[m]`` is true iff ``flags[m']`` for some ``m' ⊆ m``."""
    out = np.asarray(flags, dtype=bool).copy()
    for i in range(nbits):
        view = out.reshape(-1, 2, 1 << i)
        view[:, 1, :] |= view[:, 0, :]
    return out


def bits(mask: int, n: int) -> list:
    return [i for i in range(n) if mask >> i & 1]
