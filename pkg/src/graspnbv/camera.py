"""Pinhole depth camera model, view candidates and the two-hemisphere view sphere."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, look_at, normalized

NO_RETURN = np.inf

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


class EmptyViewSetError(ValueError):
    """Raised when a view sphere with zero candidates is requested."""


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics; +z forward, +x right, +y down (OpenCV convention)."""

    width: int = 160
    height: int = 120
    fx: float = 0.0
    fy: float = 0.0
    cx: float = 0.0
    cy: float = 0.0

    @classmethod
    def from_fov(cls, width: int = 160, height: int = 120, hfov_deg: float = 60.0) -> "CameraIntrinsics":
        fx = (width / 2.0) / np.tan(np.radians(hfov_deg) / 2.0)
        return cls(width=width, height=height, fx=fx, fy=fx, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0)

    def pixel_rays(self) -> np.ndarray:
        """Unit ray directions in the camera frame, shape (H*W, 3), row-major pixels."""
        u, v = np.meshgrid(np.arange(self.width), np.arange(self.height))
        d = np.stack(
            [(u - self.cx) / self.fx, (v - self.cy) / self.fy, np.ones_like(u, dtype=float)],
            axis=-1,
        ).reshape(-1, 3)
        return d / np.linalg.norm(d, axis=1, keepdims=True)

    def project(self, pts_cam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Project camera-frame points to integer pixels.

        Returns (pixels (N, 2) int, valid mask). Points behind the camera are invalid.
        """
        pts_cam = np.atleast_2d(pts_cam)
        z = pts_cam[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.rint(pts_cam[:, 0] / z * self.fx + self.cx).astype(np.int64)
            v = np.rint(pts_cam[:, 1] / z * self.fy + self.cy).astype(np.int64)
        valid = (z > 0) & (u >= 0) & (u < self.width) & (v >= 0) & (v < self.height)
        u[~valid] = 0
        v[~valid] = 0
        return np.stack([u, v], axis=1), valid


@dataclass(frozen=True)
class Frustum:
    """Camera viewing volume used for visibility culling."""

    pose: Pose
    intrinsics: CameraIntrinsics
    near: float = 0.05
    far: float = 2.0

    def __post_init__(self):
        if not self.near < self.far:
            raise ValueError("frustum requires near < far")


@dataclass(frozen=True)
class DepthImage:
    """Per-pixel range image in metres; NO_RETURN (inf) marks pixels with no surface hit."""

    intrinsics: CameraIntrinsics
    depths: np.ndarray  # (H, W) float, range along the pixel ray

    @property
    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.depths)


@dataclass(frozen=True)
class ViewCandidate:
    """A candidate camera pose with its viewing direction (always toward the workspace centre)."""

    pose: Pose
    view_direction: np.ndarray
    index: int

    def __post_init__(self):
        v = np.asarray(self.view_direction, dtype=float)
        object.__setattr__(self, "view_direction", v / np.linalg.norm(v))

    @property
    def position(self) -> np.ndarray:
        return self.pose.translation


def _hemisphere_lattice(n: int, phase: float = 0.0, z_offset: float = 0.0) -> np.ndarray:
    """n unit directions on the upper hemisphere, golden-angle azimuths.

    With z_offset = 0 the first direction is the exact apex (0, 0, 1).
    """
    i = np.arange(n)
    # z from the apex down toward the equator, never touching it
    z = 1.0 - (i + z_offset) / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    az = i * _GOLDEN_ANGLE + phase
    return np.stack([r * np.cos(az), r * np.sin(az), z], axis=1)


def generate_view_sphere(center: np.ndarray, radii: tuple[float, float], count: int) -> list[ViewCandidate]:
    """Evenly spaced view candidates on two concentric hemispheres above the table.

    Candidates are split as evenly as possible between the inner and outer
    hemisphere via a Fibonacci lattice; every viewing direction points at
    ``center``. Deterministic for fixed inputs. The first candidate is the apex
    of the inner hemisphere (the fixed initial view of an episode).
    """
    center = np.asarray(center, dtype=float)
    r_in, r_out = radii
    if r_in <= 0 or r_out <= 0:
        raise ValueError("hemisphere radii must be positive")
    if count < 1:
        raise EmptyViewSetError("view sphere needs at least one candidate")
    n_in = (count + 1) // 2
    n_out = count - n_in
    views: list[ViewCandidate] = []
    # Outer lattice is phase-shifted in azimuth and offset in z so no outer
    # direction is radially aligned with an inner one; the constants maximize
    # the minimum pairwise angle for the 17+17 default split.
    specs = [(r_in, _hemisphere_lattice(n_in))]
    if n_out:
        specs.append((r_out, _hemisphere_lattice(n_out, phase=5.5632, z_offset=0.75)))
    idx = 0
    for radius, dirs in specs:
        for d in dirs:
            eye = center + radius * d
            v = normalized(center - eye)
            views.append(ViewCandidate(pose=look_at(eye, center), view_direction=v, index=idx))
            idx += 1
    return views
