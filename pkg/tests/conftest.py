"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

from graspnbv.camera import CameraIntrinsics, ViewCandidate
from graspnbv.geometry import Pose, look_at
from graspnbv.occupancy import InverseSensorModel, OccupancyMap


def small_map(shape_m=(0.2, 0.2, 0.2), resolution=0.01, model=None):
    bmin = np.zeros(3)
    bmax = np.asarray(shape_m, dtype=float)
    return OccupancyMap(bmin, bmax, resolution, model or InverseSensorModel())


def view_at(eye, target, index=0):
    eye = np.asarray(eye, dtype=float)
    target = np.asarray(target, dtype=float)
    return ViewCandidate(pose=look_at(eye, target), view_direction=target - eye, index=index)


def view_with_direction(direction, index=0):
    """View candidate placed so its viewing direction equals ``direction``."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    eye = -direction
    return ViewCandidate(pose=look_at(eye, np.zeros(3)), view_direction=direction, index=index)


@pytest.fixture
def intrinsics():
    return CameraIntrinsics.from_fov(160, 120, 60.0)


@pytest.fixture
def identity_pose():
    return Pose()
