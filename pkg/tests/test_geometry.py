import math

import numpy as np
import pytest

from rp3p import (
    CameraIntrinsics,
    InvalidBearingError,
    InvalidParameterError,
    PointBehindCameraError,
    RigidPose,
    back_project_bearing,
    incidence_angle,
    inter_bearing_angle,
    look_at_rotation,
    project_world_to_pixel,
)

K = CameraIntrinsics(fu=800.0, fv=800.0, u0=320.0, v0=240.0)
IDENTITY = RigidPose(rotation=np.eye(3), position=np.zeros(3))


def random_pose(rng):
    # QR of a random matrix gives an orthonormal basis; fix the determinant.
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return RigidPose(rotation=q, position=rng.uniform(-2, 2, 3))


class TestProjection:
    def test_principal_point_on_axis(self):
        px = project_world_to_pixel(np.array([0.0, 0.0, 2.0]), IDENTITY, K)
        assert px == pytest.approx([320.0, 240.0])

    def test_unit_offset(self):
        px = project_world_to_pixel(np.array([1.0, 0.0, 1.0]), IDENTITY, K)
        assert px == pytest.approx([1120.0, 240.0])

    def test_point_behind_camera(self):
        with pytest.raises(PointBehindCameraError):
            project_world_to_pixel(np.array([0.0, 0.0, -1.0]), IDENTITY, K)

    def test_round_trip_parallel(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            pose = random_pose(rng)
            point = pose.position + pose.rotation.T @ np.append(rng.uniform(-1, 1, 2), rng.uniform(0.2, 5))
            cam_dir = pose.to_camera(point)
            cam_dir /= np.linalg.norm(cam_dir)
            bearing = back_project_bearing(project_world_to_pixel(point, pose, K), K)
            assert np.linalg.norm(np.cross(bearing, cam_dir)) < 1e-12


class TestBackProjection:
    def test_principal_point_is_optical_axis(self):
        assert back_project_bearing(np.array([320.0, 240.0]), K) == pytest.approx([0, 0, 1])

    def test_u_offset(self):
        b = back_project_bearing(np.array([1120.0, 240.0]), K)
        s = 1 / math.sqrt(2)
        assert b == pytest.approx([s, 0.0, s])

    def test_v_offset(self):
        b = back_project_bearing(np.array([320.0, 1040.0]), K)
        s = 1 / math.sqrt(2)
        assert b == pytest.approx([0.0, s, s])


class TestAngles:
    def test_on_axis_incidence(self):
        assert incidence_angle(np.array([0.0, 0.0, 1.0])) == 0.0

    def test_diagonal_incidence(self):
        assert incidence_angle(np.array([1.0, 0.0, 1.0])) == pytest.approx(math.pi / 4)

    def test_fov_boundary_incidence(self):
        b = np.array([math.tan(math.radians(60)), 0.0, 1.0])
        assert incidence_angle(b) == pytest.approx(math.pi / 3)

    def test_incidence_scale_invariant(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            b = np.append(rng.uniform(-1, 1, 2), rng.uniform(0.1, 2))
            assert incidence_angle(b) == pytest.approx(incidence_angle(7.3 * b), abs=1e-12)

    def test_identical_bearings(self):
        # arccos near 1 resolves to ~sqrt(eps); zero only up to that limit
        assert inter_bearing_angle(np.array([0.3, 0.2, 0.9]), np.array([0.3, 0.2, 0.9])) == pytest.approx(0.0, abs=1e-7)

    def test_orthogonal(self):
        assert inter_bearing_angle(np.array([1.0, 0, 0]), np.array([0, 1.0, 0])) == pytest.approx(math.pi / 2)

    def test_mirrored_diagonals(self):
        a = np.array([1.0, 0.0, 1.0])
        b = np.array([-1.0, 0.0, 1.0])
        assert inter_bearing_angle(a, b) == pytest.approx(math.pi / 2)

    def test_zero_bearing_rejected(self):
        with pytest.raises(InvalidBearingError):
            inter_bearing_angle(np.zeros(3), np.array([0, 0, 1.0]))

    def test_symmetry_and_scaling(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, b = rng.normal(size=3), rng.normal(size=3)
            assert inter_bearing_angle(a, b) == pytest.approx(inter_bearing_angle(b, a), abs=1e-14)
            assert inter_bearing_angle(3.7 * a, b) == pytest.approx(inter_bearing_angle(a, 0.2 * b), abs=1e-12)

    def test_incidence_matches_world_frame_angle(self):
        # The incidence angle is frame-independent: camera-frame computation
        # must equal the world-frame angle against the camera normal.
        rng = np.random.default_rng(7)
        for _ in range(100):
            pose = random_pose(rng)
            point = pose.position + pose.rotation.T @ np.append(rng.uniform(-1, 1, 2), rng.uniform(0.3, 4))
            pixel = project_world_to_pixel(point, pose, K)
            psi_cam = incidence_angle(back_project_bearing(pixel, K))
            normal_world = pose.axis_in_world(np.array([0.0, 0.0, 1.0]))
            to_point = point - pose.position
            psi_world = math.acos(
                np.clip(to_point @ normal_world / np.linalg.norm(to_point), -1, 1)
            )
            assert psi_cam == pytest.approx(psi_world, abs=1e-10)


class TestPoseValidation:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(InvalidParameterError):
            RigidPose(rotation=np.eye(3) + 1e-6, position=np.zeros(3))

    def test_rejects_reflection(self):
        r = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(InvalidParameterError):
            RigidPose(rotation=r, position=np.zeros(3))

    def test_intrinsics_validation(self):
        with pytest.raises(InvalidParameterError):
            CameraIntrinsics(fu=-1.0, fv=800.0, u0=0.0, v0=0.0)


def test_look_at_rotation_is_valid_pose():
    rng = np.random.default_rng(3)
    for _ in range(50):
        axis = rng.normal(size=3)
        r = look_at_rotation(axis)
        pose = RigidPose(rotation=r, position=np.zeros(3))  # validates orthonormality
        assert pose.axis_in_world(np.array([0.0, 0.0, 1.0])) == pytest.approx(axis / np.linalg.norm(axis))
