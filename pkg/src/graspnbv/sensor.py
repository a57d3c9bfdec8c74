"""Simulated depth capture, table-plane segmentation and cloud integration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import NO_RETURN, CameraIntrinsics, DepthImage, ViewCandidate
from .pointcloud import PointCloud, merge_clouds
from .scene import SceneModel

DEFAULT_INTRINSICS = CameraIntrinsics.from_fov(160, 120, 60.0)


@dataclass(frozen=True)
class NoiseParams:
    """Depth noise grows with incidence angle: sigma = sigma0 + sigma1 * tan(theta)."""

    sigma0: float = 0.001
    sigma1: float = 0.002
    max_incidence_deg: float = 85.0  # tan() clamp at grazing

    @classmethod
    def off(cls) -> "NoiseParams":
        return cls(0.0, 0.0)

    @property
    def enabled(self) -> bool:
        return self.sigma0 > 0 or self.sigma1 > 0

    def sigma(self, cos_incidence: np.ndarray) -> np.ndarray:
        theta = np.arccos(np.clip(np.abs(cos_incidence), 0.0, 1.0))
        theta = np.minimum(theta, np.radians(self.max_incidence_deg))
        return self.sigma0 + self.sigma1 * np.tan(theta)


def capture(
    scene: SceneModel,
    view: ViewCandidate,
    noise: NoiseParams | None = None,
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
    near: float = 0.05,
    far: float = 2.0,
    rng: np.random.Generator | None = None,
) -> DepthImage:
    """Ray-cast a depth image from the view pose.

    Per-pixel depth is the range to the nearest surface along the pixel ray,
    perturbed by zero-mean Gaussian noise whose standard deviation rises with
    the incidence angle. Pixels with no surface in [near, far] carry NO_RETURN.
    """
    noise = noise or NoiseParams.off()
    dirs_cam = intrinsics.pixel_rays()
    dirs = view.pose.rotate(dirs_cam)
    origins = np.tile(view.pose.translation, (len(dirs), 1))
    t, normals = scene.raycast(origins, dirs)
    if noise.enabled:
        if rng is None:
            rng = np.random.default_rng()
        cos_inc = np.abs(np.sum(dirs * normals, axis=1))
        sigma = np.where(np.isfinite(t), noise.sigma(cos_inc), 0.0)
        t = t + rng.standard_normal(len(t)) * sigma
    t = np.where((t >= near) & (t <= far), t, NO_RETURN)
    return DepthImage(intrinsics=intrinsics, depths=t.reshape(intrinsics.height, intrinsics.width))


def back_project(depth: DepthImage, view: ViewCandidate) -> tuple[np.ndarray, np.ndarray]:
    """Workspace-frame points for every pixel (flattened row-major) and the hit mask."""
    dirs = view.pose.rotate(depth.intrinsics.pixel_rays())
    t = depth.depths.reshape(-1)
    hit = np.isfinite(t)
    pts = view.pose.translation + np.where(hit, t, 0.0)[:, None] * dirs
    return pts, hit


def ray_endpoints(depth: DepthImage, view: ViewCandidate, far: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints for occupancy insertion: hit points, or far-plane points for misses."""
    dirs = view.pose.rotate(depth.intrinsics.pixel_rays())
    t = depth.depths.reshape(-1)
    hit = np.isfinite(t)
    reach = np.where(hit, t, far)
    return view.pose.translation + reach[:, None] * dirs, hit


def _neighborhood_normals(
    points_grid: np.ndarray,
    valid: np.ndarray,
    half: int = 2,
    max_neighbor_dist: float = 0.025,
    select: np.ndarray | None = None,
) -> np.ndarray:
    """Per-pixel normals from a local plane fit over a (2*half+1)^2 neighborhood.

    Neighbors farther than ``max_neighbor_dist`` from the window's center
    point are dropped so the fit never straddles a depth discontinuity (a
    silhouette pixel would otherwise mix surface and background points).
    Boundary pixels implicitly use the one-sided part of their window. Pixels
    with fewer than 3 valid neighbors get a zero normal (caller substitutes
    the view direction). ``select`` restricts the fit to a pixel mask; all
    other pixels get a zero normal.
    """
    h, w, _ = points_grid.shape
    pts = np.where(valid[:, :, None], points_grid, np.nan)
    pad = np.pad(pts, ((half, half), (half, half), (0, 0)), constant_values=np.nan)
    win = np.lib.stride_tricks.sliding_window_view(pad, (2 * half + 1, 2 * half + 1), axis=(0, 1))
    if select is None:
        select = np.ones((h, w), dtype=bool)
    # rows: (M, 3, K, K) -> (M, K*K, 3)
    rows = win[select].transpose(0, 2, 3, 1).reshape(int(np.count_nonzero(select)), -1, 3)
    centers = points_grid[select]
    far = np.linalg.norm(rows - centers[:, None, :], axis=2) > max_neighbor_dist
    rows = np.where(far[:, :, None], np.nan, rows)
    count = np.sum(~np.isnan(rows[:, :, 0]), axis=1)
    mean = np.nansum(rows, axis=1) / np.maximum(count, 1)[:, None]
    centered = np.nan_to_num(rows - mean[:, None, :], nan=0.0)
    cov = np.einsum("mki,mkj->mij", centered, centered)
    ok = count >= 3
    normals = np.zeros((h, w, 3))
    if np.any(ok):
        _, vecs = np.linalg.eigh(cov[ok])
        sel_rows, sel_cols = np.nonzero(select)
        normals[sel_rows[ok], sel_cols[ok]] = vecs[:, :, 0]  # smallest-eigenvalue direction
    return normals


def _radius_outlier_mask(points: np.ndarray, radius: float, min_neighbors: int) -> np.ndarray:
    """Keep points with at least ``min_neighbors`` others within ``radius``.

    Noisy table pixels that clear the plane threshold land isolated and far
    apart; surface points come in dense patches. Neighbor counting uses a
    coarse voxel hash so the common case stays near-linear.
    """
    n = len(points)
    if n == 0 or min_neighbors <= 0:
        return np.ones(n, dtype=bool)
    keys = np.floor(points / radius).astype(np.int64)
    buckets: dict[tuple, list[int]] = {}
    for i, k in enumerate(map(tuple, keys)):
        buckets.setdefault(k, []).append(i)
    keep = np.zeros(n, dtype=bool)
    r2 = radius * radius
    for k, idx in buckets.items():
        neigh: list[int] = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    neigh.extend(buckets.get((k[0] + dx, k[1] + dy, k[2] + dz), ()))
        cand = points[neigh]
        for i in idx:
            d2 = np.sum((cand - points[i]) ** 2, axis=1)
            # the point itself is in cand, hence the +1
            keep[i] = np.count_nonzero(d2 <= r2) >= min_neighbors + 1
    return keep


def segment(
    depth: DepthImage,
    view: ViewCandidate,
    table_height: float = 0.0,
    eps_plane: float = 0.005,
    workspace_min: np.ndarray | None = None,
    workspace_max: np.ndarray | None = None,
    outlier_radius: float = 0.01,
    outlier_min_neighbors: int = 5,
) -> PointCloud:
    """Back-project a depth image and strip the table plane.

    Keeps points strictly above table_height + eps_plane, estimates per-point
    normals from 5x5 depth-image neighborhoods, and orients every normal
    toward the camera. A radius-outlier pass removes lone noise points
    (set outlier_min_neighbors to 0 to disable).
    """
    h, w = depth.intrinsics.height, depth.intrinsics.width
    pts, hit = back_project(depth, view)
    grid = pts.reshape(h, w, 3)
    valid = hit.reshape(h, w)
    keep = valid & (grid[:, :, 2] > table_height + eps_plane)
    if workspace_min is not None and workspace_max is not None:
        inside = np.all((grid >= workspace_min) & (grid <= workspace_max), axis=2)
        keep &= inside
    normals = _neighborhood_normals(grid, valid, select=keep)
    pts = grid[keep]
    nrm = normals[keep]
    cam = view.pose.translation
    flip = np.sum(nrm * (cam - pts), axis=1) < 0
    nrm = np.where(flip[:, None], -nrm, nrm)
    degenerate = np.linalg.norm(nrm, axis=1) < 1e-8
    nrm[degenerate] = -view.view_direction
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    mask = _radius_outlier_mask(pts, outlier_radius, outlier_min_neighbors)
    return PointCloud(pts[mask], nrm[mask])


def integrate(prev: PointCloud, new: PointCloud, resolution: float = 0.005) -> PointCloud:
    """Union of two workspace clouds with voxel-grid deduplication."""
    return merge_clouds(prev, new, resolution)
