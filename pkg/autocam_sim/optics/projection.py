"""Analytic camera projections (pinhole and equidistant fisheye).

Film coordinates are millimetres with x to the right and y up, origin at
the film center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from autocam_sim.models import CameraConfig


@dataclass(frozen=True)
class CameraFrame:
    """Orthonormal camera basis in world coordinates (metres)."""

    origin: np.ndarray
    forward: np.ndarray
    right: np.ndarray
    up: np.ndarray

    @classmethod
    def from_config(cls, camera: CameraConfig) -> CameraFrame:
        origin = np.asarray(camera.position, dtype=np.float64)
        forward = np.asarray(camera.look_at, dtype=np.float64) - origin
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, np.asarray(camera.up, dtype=np.float64))
        right /= np.linalg.norm(right)
        up = np.cross(right, forward)
        return cls(origin, forward, right, up)

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        """World points (..., 3) to camera coordinates (right, up, forward)."""
        d = np.asarray(points, dtype=np.float64) - self.origin
        return np.stack([d @ self.right, d @ self.up, d @ self.forward], axis=-1)

    def to_world_directions(self, local: np.ndarray) -> np.ndarray:
        local = np.asarray(local, dtype=np.float64)
        return local[..., :1] * self.right + local[..., 1:2] * self.up + local[..., 2:3] * self.forward


def pinhole_focal_mm(camera: CameraConfig) -> float:
    """Pinhole distance giving ``camera.fov_deg`` across the film width."""
    return 0.5 * camera.film_width_mm / np.tan(np.radians(camera.fov_deg) / 2)


def pinhole_project(point, camera: CameraConfig) -> tuple[float, float] | None:
    """Film position of a world point, or None when it is not in front of the camera."""
    local = CameraFrame.from_config(camera).to_camera(point)
    if local[2] <= 0:
        return None
    f = pinhole_focal_mm(camera)
    return float(f * local[0] / local[2]), float(f * local[1] / local[2])


def pinhole_directions(film_xy: np.ndarray, camera: CameraConfig) -> np.ndarray:
    """Camera-space unit directions for film points (N, 2)."""
    film_xy = np.asarray(film_xy, dtype=np.float64)
    f = pinhole_focal_mm(camera)
    d = np.concatenate([film_xy, np.full((len(film_xy), 1), f)], axis=1)
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def fisheye_project(point, camera: CameraConfig) -> tuple[float, float] | None:
    """Equidistant mapping r = f·θ; None beyond half the field of view."""
    local = CameraFrame.from_config(camera).to_camera(point)
    norm = np.linalg.norm(local)
    if norm == 0:
        return None
    theta = float(np.arccos(np.clip(local[2] / norm, -1.0, 1.0)))
    if theta > np.radians(camera.fov_deg) / 2:
        return None
    r = camera.focal_length_mm * theta
    phi = np.arctan2(local[1], local[0])
    return float(r * np.cos(phi)), float(r * np.sin(phi))


def fisheye_directions(
    film_xy: np.ndarray, focal_length_mm: float, fov_deg: float
) -> tuple[np.ndarray, np.ndarray]:
    """Inverse equidistant mapping: camera-space directions and a validity mask."""
    film_xy = np.asarray(film_xy, dtype=np.float64)
    r = np.hypot(film_xy[:, 0], film_xy[:, 1])
    theta = r / focal_length_mm
    valid = (theta <= np.radians(fov_deg) / 2) & (theta <= np.pi)
    phi = np.arctan2(film_xy[:, 1], film_xy[:, 0])
    sin_t = np.sin(theta)
    d = np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), np.cos(theta)], axis=1)
    return d, valid
