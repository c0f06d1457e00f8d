"""Heisenberg uncertainty ray bending at the aperture stop.

A ray passing the stop at distance ``d`` from its edge is tilted by
independent Gaussian angles about two orthogonal tangent axes, each with
standard deviation ``lambda / (2 pi d)``.
"""

from __future__ import annotations

import numpy as np

MIN_EDGE_DISTANCE_MM = 1e-6


def hurb_sigma(wavelength_nm, edge_distance_mm) -> np.ndarray:
    """Angular standard deviation (radians) per tangent axis."""
    d = np.maximum(np.asarray(edge_distance_mm, dtype=np.float64), MIN_EDGE_DISTANCE_MM)
    return np.asarray(wavelength_nm, dtype=np.float64) * 1e-6 / (2.0 * np.pi * d)


def tangent_basis(directions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors orthogonal to each unit direction and to each other."""
    d = np.asarray(directions, dtype=np.float64)
    x, y, z = d[..., 0], d[..., 1], d[..., 2]
    sign = np.where(z >= 0.0, 1.0, -1.0)
    a = -1.0 / (sign + z)
    b = x * y * a
    t1 = np.stack([1.0 + sign * x * x * a, sign * b, -sign * x], axis=-1)
    t2 = np.stack([b, sign + y * y * a, -y], axis=-1)
    return t1, t2


def tilt_directions(directions: np.ndarray, angle1: np.ndarray, angle2: np.ndarray) -> np.ndarray:
    """Rotate directions by small angles about their two tangent axes."""
    d = np.asarray(directions, dtype=np.float64)
    t1, t2 = tangent_basis(d)
    out = d + np.tan(angle1)[..., None] * t1 + np.tan(angle2)[..., None] * t2
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def hurb_perturb(
    direction: np.ndarray,
    edge_distance_mm,
    wavelength_nm,
    rng: np.random.Generator | None = None,
    normals: np.ndarray | None = None,
) -> np.ndarray:
    """Perturbed unit direction(s).

    Args:
        direction: (3,) or (N, 3) unit directions at the stop.
        edge_distance_mm: distance from the stop edge; clamped to 1e-6 mm.
        wavelength_nm: wavelength(s).
        rng: source of the two standard normals per ray.
        normals: pre-drawn standard normals (..., 2), used instead of ``rng``.
    """
    d = np.asarray(direction, dtype=np.float64)
    single = d.ndim == 1
    d = np.atleast_2d(d)
    if normals is None:
        if rng is None:
            raise ValueError("hurb_perturb needs rng or normals")
        normals = rng.standard_normal((d.shape[0], 2))
    normals = np.asarray(normals, dtype=np.float64).reshape(d.shape[0], 2)
    sigma = np.broadcast_to(hurb_sigma(wavelength_nm, edge_distance_mm), (d.shape[0],))
    out = tilt_directions(d, sigma * normals[:, 0], sigma * normals[:, 1])
    return out[0] if single else out
