"""Vector form of Snell's law."""

from __future__ import annotations

import numpy as np


def refract_many(
    directions: np.ndarray, normals: np.ndarray, n1: np.ndarray | float, n2: np.ndarray | float
) -> tuple[np.ndarray, np.ndarray]:
    """Refract unit directions (N, 3) at surfaces with unit normals (N, 3).

    Normals may face either way; they are flipped to oppose the incoming
    ray. Returns (refracted directions, total-internal-reflection mask);
    rows flagged TIR keep their incoming direction.
    """
    d = np.asarray(directions, dtype=np.float64)
    n = np.asarray(normals, dtype=np.float64)
    cos_i = -np.sum(d * n, axis=-1)
    flip = cos_i < 0
    n = np.where(flip[..., None], -n, n)
    cos_i = np.abs(cos_i)
    eta = np.broadcast_to(np.asarray(n1, dtype=np.float64) / np.asarray(n2, dtype=np.float64), cos_i.shape)
    k = 1.0 - eta**2 * (1.0 - cos_i**2)
    tir = k < 0
    cos_t = np.sqrt(np.where(tir, 0.0, k))
    out = eta[..., None] * d + (eta * cos_i - cos_t)[..., None] * n
    out = out / np.linalg.norm(out, axis=-1, keepdims=True)
    out = np.where(tir[..., None], d, out)
    return out, tir


def refract(direction, normal, n1: float, n2: float) -> np.ndarray | None:
    """Refracted unit direction, or None on total internal reflection."""
    out, tir = refract_many(
        np.asarray(direction, dtype=np.float64)[None], np.asarray(normal, dtype=np.float64)[None], n1, n2
    )
    if tir[0]:
        return None
    return out[0]
