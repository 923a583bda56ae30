"""IEEE 802.16 rate-1/2 quasi-cyclic LDPC construction.

The 12x24 base matrix below carries circulant shifts for expansion factor
z0 = 96 (-1 marks an all-zero block). For other factors the shifts scale
as floor(p * z / 96). Expanding with z = 8 yields the (192, 96) code used
throughout the experiments; the result is emitted as standard alist text
so the generic loader is the only parser in play.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from lctsim.ldpc import ParityCheckMatrix, load_parity_alist, to_alist

BASE_Z = 96

# Rate-1/2 base matrix, one row per line, 24 entries per row.
_BASE_SHIFTS = np.array([
    [-1, 94, 73, -1, -1, -1, -1, -1, 55, 83, -1, -1,  7,  0, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [-1, 27, -1, -1, -1, 22, 79,  9, -1, -1, -1, 12, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [-1, -1, -1, 24, 22, 81, -1, 33, -1, -1, -1,  0, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1, -1],
    [61, -1, 47, -1, -1, -1, -1, -1, 65, 25, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1, -1],
    [-1, -1, 39, -1, -1, -1, 84, -1, -1, 41, 72, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1, -1],
    [-1, -1, -1, -1, 46, 40, -1, 82, -1, -1, -1, 79,  0, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1, -1],
    [-1, -1, 95, 53, -1, -1, -1, -1, -1, 14, 18, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1, -1],
    [-1, 11, 73, -1, -1, -1,  2, -1, -1, 47, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1, -1],
    [12, -1, -1, -1, 83, 24, -1, 43, -1, -1, -1, 51, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1, -1],
    [-1, -1, -1, -1, -1, 94, -1, 59, -1, -1, 70, 72, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0, -1],
    [-1, -1,  7, 65, -1, -1, -1, -1, 39, 49, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0,  0],
    [43, -1, -1, -1, -1, 66, -1, 41, -1, -1, -1, 26,  7, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1,  0],
], dtype=np.int64)


def scaled_base_matrix(z: int) -> np.ndarray:
    """Shift table for expansion factor z (floor scaling from z0 = 96)."""
    if z < 1 or z > BASE_Z:
        raise ValueError(f"expansion factor must be in 1..{BASE_Z}, got {z}")
    scaled = _BASE_SHIFTS.copy()
    pos = scaled > 0
    scaled[pos] = (scaled[pos] * z) // BASE_Z
    return scaled


def expand_alist(z: int = 8) -> str:
    """Expand the base matrix with factor z and emit alist text."""
    shifts = scaled_base_matrix(z)
    n_block_rows, n_block_cols = shifts.shape
    rows = [[] for _ in range(n_block_rows * z)]
    for bi in range(n_block_rows):
        for bj in range(n_block_cols):
            s = shifts[bi, bj]
            if s < 0:
                continue
            for t in range(z):
                rows[bi * z + t].append(bj * z + (t + s) % z)
    pcm = ParityCheckMatrix(n_block_cols * z, [sorted(r) for r in rows])
    return to_alist(pcm)


def bundled_alist_path() -> Path:
    """Path of the shipped (192, 96) alist file."""
    return Path(resources.files("lctsim").joinpath("data/wimax_192_96.alist"))


def load_wimax_code(z: int = 8) -> ParityCheckMatrix:
    """Expand and load the rate-1/2 code for factor z."""
    return load_parity_alist(expand_alist(z))
