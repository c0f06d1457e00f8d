"""Rigid transforms with uniform scale, quaternion helpers and interpolation.

Transforms map object space to world space as ``p_world = T + s * R @ p``.
Quaternions are stored (w, x, y, z).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def quat_from_axis_angle(axis: np.ndarray, angle_rad: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        if angle_rad != 0.0:
            raise ValueError("rotation axis must be non-zero")
        return np.array([1.0, 0.0, 0.0, 0.0])
    axis = axis / norm
    half = 0.5 * angle_rad
    return np.concatenate(([np.cos(half)], np.sin(half) * axis))


def quat_to_axis_angle(q: np.ndarray) -> tuple[np.ndarray, float]:
    """Axis and angle (radians) of a unit quaternion; identity yields the z axis."""
    q = np.asarray(q, dtype=np.float64)
    if q[0] < 0:
        q = -q
    s = np.linalg.norm(q[1:])
    if s < 1e-15:
        return np.array([0.0, 0.0, 1.0]), 0.0
    return q[1:] / s, 2.0 * np.arctan2(s, q[0])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrices for quaternions of shape (..., 4) -> (..., 3, 3)."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - w * z)
    m[..., 0, 2] = 2 * (x * z + w * y)
    m[..., 1, 0] = 2 * (x * y + w * z)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - w * x)
    m[..., 2, 0] = 2 * (x * z - w * y)
    m[..., 2, 1] = 2 * (y * z + w * x)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def matrix_to_quat(m: np.ndarray) -> np.ndarray:
    """Unit quaternion of a proper rotation matrix (Shepperd's method)."""
    m = np.asarray(m, dtype=np.float64)
    trace = np.trace(m)
    if trace > 0:
        s = 2.0 * np.sqrt(trace + 1.0)
        q = [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = 2.0 * np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
        q = [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
    elif m[1, 1] > m[2, 2]:
        s = 2.0 * np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
        q = [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
        q = [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
    q = np.array(q)
    return q / np.linalg.norm(q)


def slerp(q0: np.ndarray, q1: np.ndarray, u: np.ndarray | float) -> np.ndarray:
    """Spherical-linear interpolation; ``u`` may be an array, giving (..., 4)."""
    q0 = np.asarray(q0, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)[..., None]
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        q1 = -q1
        dot = -dot
    if dot > 0.9995:
        q = (1.0 - u) * q0 + u * q1
        return q / np.linalg.norm(q, axis=-1, keepdims=True)
    theta = np.arccos(min(dot, 1.0))
    sin_theta = np.sin(theta)
    return (np.sin((1.0 - u) * theta) * q0 + np.sin(u * theta) * q1) / sin_theta


@dataclass(frozen=True, eq=False)
class Transform:
    """Translation (m), rotation quaternion and uniform scale."""

    translation: np.ndarray
    rotation: np.ndarray
    scale: float = 1.0

    def __post_init__(self) -> None:
        t = np.array(self.translation, dtype=np.float64).reshape(3)
        q = np.array(self.rotation, dtype=np.float64).reshape(4)
        n = np.linalg.norm(q)
        if n == 0.0:
            raise ValueError("rotation quaternion must be non-zero")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", q / n)
        object.__setattr__(self, "scale", float(self.scale))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Transform):
            return NotImplemented
        return (
            np.array_equal(self.translation, other.translation)
            and np.array_equal(self.rotation, other.rotation)
            and self.scale == other.scale
        )

    @classmethod
    def identity(cls) -> Transform:
        return cls(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0]), 1.0)

    @classmethod
    def from_axis_angle(
        cls, translation, axis=(0.0, 0.0, 1.0), angle_deg: float = 0.0, scale: float = 1.0
    ) -> Transform:
        return cls(np.asarray(translation), quat_from_axis_angle(np.asarray(axis), np.radians(angle_deg)), scale)

    @classmethod
    def from_yaw(cls, translation, yaw_rad: float, scale: float = 1.0) -> Transform:
        return cls(np.asarray(translation), quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), yaw_rad), scale)

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.scale * self.rotation_matrix()
        m[:3, 3] = self.translation
        return m

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        return self.translation + self.scale * (np.asarray(points) @ self.rotation_matrix().T)


def decompose_matrix(m: np.ndarray, tol: float = 1e-9) -> Transform:
    """Split a 4×4 affine matrix into translation, rotation and uniform scale.

    Raises ValueError for shear, non-uniform scale, reflection or a
    projective bottom row.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (4, 4):
        raise ValueError("transform matrix must be 4x4")
    if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], atol=tol):
        raise ValueError("transform matrix must be affine (last row 0 0 0 1)")
    linear = m[:3, :3]
    gram = linear.T @ linear
    scale_sq = np.trace(gram) / 3.0
    if scale_sq <= 0:
        raise ValueError("transform matrix is singular")
    if not np.allclose(gram, scale_sq * np.eye(3), atol=tol * max(1.0, scale_sq)):
        raise ValueError("transform matrix has shear or non-uniform scale")
    scale = float(np.sqrt(scale_sq))
    rot = linear / scale
    if np.linalg.det(rot) < 0:
        raise ValueError("transform matrix contains a reflection")
    return Transform(m[:3, 3].copy(), matrix_to_quat(rot), scale)


def interpolate_transform(t0: Transform, t1: Transform, u: float) -> Transform:
    """Linear translation/scale and spherical-linear rotation between two transforms."""
    if u <= 0.0:
        return t0
    if u >= 1.0:
        return t1
    translation = (1.0 - u) * t0.translation + u * t1.translation
    scale = (1.0 - u) * t0.scale + u * t1.scale
    return Transform(translation, slerp(t0.rotation, t1.rotation, u), scale)


def interpolate_arrays(
    t0: Transform, t1: Transform, u: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised interpolation: (N,3) translations, (N,3,3) rotations, (N,) scales."""
    u = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
    translations = (1.0 - u)[:, None] * t0.translation + u[:, None] * t1.translation
    scales = (1.0 - u) * t0.scale + u * t1.scale
    if np.array_equal(t0.rotation, t1.rotation):
        rotations = np.broadcast_to(t0.rotation_matrix(), (u.shape[0], 3, 3))
    else:
        rotations = quat_to_matrix(slerp(t0.rotation, t1.rotation, u))
    return translations, rotations, scales
