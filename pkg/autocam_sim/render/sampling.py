"""Counter-based random numbers keyed by (seed, pixel, sample, dimension).

Every random decision in the renderer reads a fixed dimension of the
stream belonging to its (pixel, sample) pair, so images do not depend on
tile order or thread count.
"""

from __future__ import annotations

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_INV_2_53 = 1.0 / 9007199254740992.0

# Dimension layout of one camera path.
DIM_PIXEL_X = 0
DIM_PIXEL_Y = 1
DIM_TIME = 2
DIM_LENS_U = 3
DIM_LENS_V = 4
DIM_DIFFRACTION = 5  # and 6
DIM_BAND = 7
DIM_BOUNCE_BASE = 8
DIMS_PER_BOUNCE = 6


def mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> _S30)) * _M1
        x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


class SampleStream:
    """Uniform and normal variates for a batch of (pixel, sample) paths."""

    def __init__(self, seed: int, pixel_index: np.ndarray, sample_index: np.ndarray):
        seed_key = mix64(np.uint64(seed % 2**64))
        pixel = np.asarray(pixel_index, dtype=np.uint64)
        sample = np.asarray(sample_index, dtype=np.uint64)
        with np.errstate(over="ignore"):
            self._key = mix64(mix64(seed_key ^ pixel) + sample * _GOLDEN)

    def __len__(self) -> int:
        return int(self._key.shape[0])

    def uniform(self, dim: int, subset: np.ndarray | None = None) -> np.ndarray:
        """Uniform variates in [0, 1) for ``dim``, optionally for a subset of paths."""
        key = self._key if subset is None else self._key[subset]
        with np.errstate(over="ignore"):
            bits = mix64(key + np.uint64(dim + 1) * _GOLDEN)
        return (bits >> _S11).astype(np.float64) * _INV_2_53

    def normal_pair(self, dim: int, subset: np.ndarray | None = None) -> np.ndarray:
        """Two independent standard normals per path (Box-Muller over ``dim``, ``dim + 1``)."""
        u1 = 1.0 - self.uniform(dim, subset)
        u2 = self.uniform(dim + 1, subset)
        r = np.sqrt(-2.0 * np.log(u1))
        return np.stack([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)], axis=-1)


def bounce_dim(bounce: int, offset: int) -> int:
    return DIM_BOUNCE_BASE + DIMS_PER_BOUNCE * bounce + offset
