"""Pinhole camera model and bearing-angle computations.

World points, bearings and pixel coordinates are plain numpy arrays
(shape (3,) and (2,)).  The camera frame follows the usual computer vision
convention: x right, y down, z forward along the optical axis, so a point is
imageable only when its camera-frame z is strictly positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidBearingError,
    InvalidParameterError,
    PointBehindCameraError,
)

OPTICAL_AXIS = np.array([0.0, 0.0, 1.0])


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize a vector, raising on zero length."""
    n = np.linalg.norm(v)
    if n == 0.0 or not np.isfinite(n):
        raise InvalidBearingError("cannot normalize zero or non-finite vector")
    return v / n


def clamped_arccos(c: float) -> float:
    """arccos with the argument clamped to [-1, 1].

    Floating-point drift of order 1e-16 otherwise yields NaN at exact
    alignment or anti-alignment.
    """
    return float(np.arccos(min(1.0, max(-1.0, c))))


@dataclass(frozen=True)
class CameraIntrinsics:
    """Calibrated pinhole intrinsics: focal ratios and principal point, in pixels."""

    fu: float
    fv: float
    u0: float
    v0: float

    def __post_init__(self):
        if not (self.fu > 0 and self.fv > 0):
            raise InvalidParameterError("focal ratios must be positive")


@dataclass(frozen=True)
class RigidPose:
    """Camera pose: world-to-camera rotation and camera center in world coordinates.

    The rotation must be orthonormal with determinant +1 (checked to 1e-9).
    """

    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        c = np.asarray(self.position, dtype=float)
        if r.shape != (3, 3) or c.shape != (3,):
            raise InvalidParameterError("pose needs a 3x3 rotation and a 3-vector position")
        if np.max(np.abs(r @ r.T - np.eye(3))) > 1e-9:
            raise InvalidParameterError("rotation is not orthonormal to 1e-9")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise InvalidParameterError("rotation determinant is not +1 to 1e-9")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "position", c)

    def to_camera(self, point: np.ndarray) -> np.ndarray:
        """World point -> camera-frame coordinates."""
        return self.rotation @ (np.asarray(point, dtype=float) - self.position)

    def axis_in_world(self, camera_axis: np.ndarray) -> np.ndarray:
        """Express a camera-frame axis (e.g. the optical axis) in world coordinates."""
        return self.rotation.T @ np.asarray(camera_axis, dtype=float)


def project_world_to_pixel(
    point: np.ndarray, pose: RigidPose, intrinsics: CameraIntrinsics
) -> np.ndarray:
    """Project a world point through the pinhole model to pixel coordinates.

    Raises PointBehindCameraError when the point has camera-frame depth <= 0,
    which signals that it is not imageable from this pose.
    """
    xc, yc, zc = pose.to_camera(point)
    if zc <= 0.0:
        raise PointBehindCameraError(f"camera-frame depth {zc:.6g} <= 0")
    return np.array([
        intrinsics.fu * (xc / zc) + intrinsics.u0,
        intrinsics.fv * (yc / zc) + intrinsics.v0,
    ])


def back_project_bearing(pixel: np.ndarray, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Unit bearing in the camera frame for a pixel coordinate.

    The z component is strictly positive by construction.
    """
    u, v = float(pixel[0]), float(pixel[1])
    return unit(np.array([
        (u - intrinsics.u0) / intrinsics.fu,
        (v - intrinsics.v0) / intrinsics.fv,
        1.0,
    ]))


def incidence_angle(bearing: np.ndarray) -> float:
    """Angle between a camera-frame bearing and the optical axis, in [0, pi/2).

    Accepts unnormalized input; the caller must guarantee a positive z
    component (true for any bearing from back_project_bearing).
    """
    b = unit(np.asarray(bearing, dtype=float))
    return clamped_arccos(float(b @ OPTICAL_AXIS))


def inter_bearing_angle(b_i: np.ndarray, b_j: np.ndarray) -> float:
    """Angle between two bearings, in [0, pi].  Inputs may be unnormalized."""
    u = unit(np.asarray(b_i, dtype=float))
    v = unit(np.asarray(b_j, dtype=float))
    return clamped_arccos(float(u @ v))


def look_at_rotation(axis_world: np.ndarray) -> np.ndarray:
    """World-to-camera rotation whose optical axis points along axis_world.

    The roll is fixed deterministically: camera x is the projection of a world
    reference axis onto the plane normal to the boresight.
    """
    z = unit(np.asarray(axis_world, dtype=float))
    ref = np.array([1.0, 0.0, 0.0])
    if abs(z @ ref) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    x = unit(ref - (ref @ z) * z)
    y = np.cross(z, x)
    # Rows are the camera axes expressed in world coordinates.
    return np.vstack([x, y, z])
