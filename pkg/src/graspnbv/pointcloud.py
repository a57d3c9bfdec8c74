"""Oriented point clouds in the workspace frame, with ASCII PLY IO."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PointCloud:
    """Points with unit normals, both (N, 3), in workspace coordinates."""

    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    normals: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        self.normals = np.asarray(self.normals, dtype=float).reshape(-1, 3)
        if len(self.points) != len(self.normals):
            raise ValueError("points and normals must have the same length")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0


def voxel_keys(points: np.ndarray, resolution: float, origin: np.ndarray | None = None) -> np.ndarray:
    """Integer voxel indices of each point at the given resolution."""
    pts = np.atleast_2d(points)
    if origin is not None:
        pts = pts - origin
    return np.floor(pts / resolution).astype(np.int64)


def voxel_downsample(cloud: PointCloud, resolution: float) -> PointCloud:
    """Keep the first point per occupied voxel; deterministic for a fixed input order."""
    if cloud.is_empty:
        return cloud
    keys = voxel_keys(cloud.points, resolution)
    _, first = np.unique(keys, axis=0, return_index=True)
    first.sort()
    return PointCloud(cloud.points[first], cloud.normals[first])


def merge_clouds(prev: PointCloud, new: PointCloud, resolution: float) -> PointCloud:
    """Union with voxel-grid deduplication; earlier points win inside a voxel."""
    if prev.is_empty:
        return voxel_downsample(new, resolution)
    if new.is_empty:
        return voxel_downsample(prev, resolution)
    merged = PointCloud(
        np.concatenate([prev.points, new.points]),
        np.concatenate([prev.normals, new.normals]),
    )
    return voxel_downsample(merged, resolution)


def save_ply(cloud: PointCloud, path: str) -> None:
    """Write an ASCII PLY with x y z nx ny nz properties."""
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(cloud)}\n")
        for prop in ("x", "y", "z", "nx", "ny", "nz"):
            fh.write(f"property float {prop}\n")
        fh.write("end_header\n")
        for p, n in zip(cloud.points, cloud.normals):
            fh.write(f"{p[0]:.6f} {p[1]:.6f} {p[2]:.6f} {n[0]:.6f} {n[1]:.6f} {n[2]:.6f}\n")


def load_ply(path: str) -> PointCloud:
    with open(path) as fh:
        line = fh.readline().strip()
        if line != "ply":
            raise ValueError(f"{path}: not a PLY file")
        count = 0
        while True:
            line = fh.readline()
            if not line:
                raise ValueError(f"{path}: truncated PLY header")
            if line.startswith("element vertex"):
                count = int(line.split()[-1])
            if line.strip() == "end_header":
                break
        data = np.loadtxt(fh, dtype=float, max_rows=count).reshape(count, 6) if count else np.zeros((0, 6))
    return PointCloud(data[:, :3], data[:, 3:])
