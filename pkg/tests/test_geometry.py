from __future__ import annotations

import numpy as np
import pytest

from autocam_sim.geometry import (
    Transform,
    decompose_matrix,
    interpolate_arrays,
    interpolate_transform,
    matrix_to_quat,
    quat_to_matrix,
)


def test_identity_leaves_points():
    pts = np.array([[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]])
    np.testing.assert_allclose(Transform.identity().apply_points(pts), pts)


def test_yaw_rotates_x_into_y():
    t = Transform.from_yaw((1.0, 0.0, 0.0), np.pi / 2)
    np.testing.assert_allclose(t.apply_points(np.array([[1.0, 0.0, 0.0]])), [[1.0, 1.0, 0.0]], atol=1e-12)


def test_matrix_matches_apply_points():
    t = Transform.from_axis_angle((0.5, -2.0, 1.0), (1.0, 1.0, 0.0), 33.0, scale=2.5)
    p = np.array([0.3, -0.7, 1.1])
    via_matrix = (t.matrix() @ np.append(p, 1.0))[:3]
    np.testing.assert_allclose(via_matrix, t.apply_points(p[None])[0], atol=1e-12)


def test_decompose_round_trip():
    t = Transform.from_axis_angle((4.0, 5.0, 6.0), (0.2, -0.4, 1.0), 71.0, scale=0.5)
    back = decompose_matrix(t.matrix())
    np.testing.assert_allclose(back.matrix(), t.matrix(), atol=1e-12)
    assert back.scale == pytest.approx(0.5)


@pytest.mark.parametrize(
    "matrix",
    [
        np.diag([1.0, 2.0, 1.0, 1.0]),  # non-uniform scale
        np.diag([-1.0, 1.0, 1.0, 1.0]),  # reflection
        np.array([[1.0, 0.5, 0, 0], [0, 1.0, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1.0]]),  # shear
        np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 1.0, 0], [0, 0, 0.1, 1.0]]),  # projective
    ],
)
def test_decompose_rejects(matrix):
    with pytest.raises(ValueError):
        decompose_matrix(matrix)


def test_quaternion_matrix_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(20):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        back = matrix_to_quat(quat_to_matrix(q))
        assert min(np.linalg.norm(back - q), np.linalg.norm(back + q)) < 1e-9


def test_interpolation_endpoints_and_midpoint():
    t0 = Transform.from_yaw((0.0, 0.0, 0.0), 0.0)
    t1 = Transform.from_yaw((10.0, 0.0, 0.0), np.pi / 2)
    assert interpolate_transform(t0, t1, 0.0) == t0
    assert interpolate_transform(t0, t1, 1.0) == t1
    mid = interpolate_transform(t0, t1, 0.5)
    np.testing.assert_allclose(mid.translation, [5.0, 0.0, 0.0])
    expected = Transform.from_yaw((5.0, 0.0, 0.0), np.pi / 4).rotation_matrix()
    np.testing.assert_allclose(mid.rotation_matrix(), expected, atol=1e-12)


def test_vectorised_interpolation_matches_scalar():
    t0 = Transform.from_axis_angle((0.0, 1.0, 0.0), (0.0, 0.0, 1.0), 10.0)
    t1 = Transform.from_axis_angle((3.0, 1.0, 2.0), (0.0, 0.0, 1.0), 80.0, scale=2.0)
    u = np.array([0.0, 0.25, 0.6, 1.0])
    translations, rotations, scales = interpolate_arrays(t0, t1, u)
    for k, uk in enumerate(u):
        ref = interpolate_transform(t0, t1, float(uk))
        np.testing.assert_allclose(translations[k], ref.translation, atol=1e-12)
        np.testing.assert_allclose(rotations[k], ref.rotation_matrix(), atol=1e-9)
        assert scales[k] == pytest.approx(ref.scale)


def test_zero_scale_rejected():
    with pytest.raises(ValueError):
        Transform((0, 0, 0), (1, 0, 0, 0), 0.0)
