"""Row-major run-length encoding for binary masks.

Alternating run lengths; the first run counts zeros and may be 0. Kept
dependency-light so protocol peers can decode without an image library.
"""

from __future__ import annotations

import numpy as np


def rle_encode(mask: np.ndarray) -> list[int]:
    flat = np.asarray(mask, dtype=np.uint8).ravel()
    changes = np.flatnonzero(np.diff(flat)) + 1
    boundaries = np.concatenate(([0], changes, [flat.size]))
    runs = [int(n) for n in np.diff(boundaries)]
    if flat[0] != 0:
        runs.insert(0, 0)
    return runs


def rle_decode(width: int, height: int, runs: list[int]) -> np.ndarray:
    total = width * height
    if sum(runs) != total:
        raise ValueError(f"run lengths sum to {sum(runs)}, expected {total}")
    flat = np.zeros(total, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        if value:
            flat[pos : pos + run] = True
        pos += run
        value = not value
    return flat.reshape(height, width)
