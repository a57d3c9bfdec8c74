"""Log-odds occupancy grid over the workspace, with entropy and visibility queries.

The map stores one log-odds value per voxel on a dense grid spanning the
workspace AABB. A voxel never touched by any ray stays at L = 0, i.e.
p = 0.5 exactly. Updates are additive per traversed ray and clamped.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from math import log

import numpy as np

from . import kernels
from .camera import Frustum
from .pointcloud import PointCloud

VoxelKey = tuple[int, int, int]

FREE = "free"
UNKNOWN = "unknown"
OCCUPIED = "occupied"

_MAP_MAGIC = b"GNBVMAP1"


class NoObjectEvidenceError(ValueError):
    """Raised when a bounding region is requested for an empty cloud."""


@dataclass(frozen=True)
class InverseSensorModel:
    """Per-observation log-odds increments, clamps and classification thresholds."""

    l_occ: float = log(0.7 / 0.3)  # hit: p = 0.7
    l_miss: float = log(0.4 / 0.6)  # pass-through: p = 0.4
    l_min: float = -2.0
    l_max: float = 3.5
    p_occ_thresh: float = 0.75
    p_free_thresh: float = 0.25


def occupancy_probability(log_odds):
    """Log-odds to occupancy probability: 1 - 1 / (1 + exp(L))."""
    log_odds = np.asarray(log_odds, dtype=float)
    return 1.0 - 1.0 / (1.0 + np.exp(log_odds))


def voxel_entropy(p):
    """Bernoulli entropy in nats, with 0*log(0) := 0."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -p * np.log(p) - (1.0 - p) * np.log(1.0 - p)
    return np.where((p <= 0.0) | (p >= 1.0), 0.0, h)


def predicted_entropy(log_odds, model: InverseSensorModel = InverseSensorModel()):
    """Expected entropy after one imaginary measurement, equally likely hit or miss.

    The imaginary updates are deliberately not clamped.
    """
    log_odds = np.asarray(log_odds, dtype=float)
    h_hit = voxel_entropy(occupancy_probability(log_odds + model.l_occ))
    h_miss = voxel_entropy(occupancy_probability(log_odds + model.l_miss))
    return 0.5 * h_hit + 0.5 * h_miss


def information_gain(log_odds, model: InverseSensorModel = InverseSensorModel()):
    """Current entropy minus predicted entropy for one voxel."""
    log_odds = np.asarray(log_odds, dtype=float)
    return voxel_entropy(occupancy_probability(log_odds)) - predicted_entropy(log_odds, model)


class OccupancyMap:
    """Dense log-odds voxel grid over the workspace bounds."""

    def __init__(
        self,
        workspace_min: np.ndarray,
        workspace_max: np.ndarray,
        resolution: float = 0.005,
        model: InverseSensorModel = InverseSensorModel(),
    ):
        self.bmin = np.asarray(workspace_min, dtype=float)
        self.bmax = np.asarray(workspace_max, dtype=float)
        self.resolution = float(resolution)
        self.model = model
        shape = np.ceil((self.bmax - self.bmin) / self.resolution - 1e-9).astype(int)
        self.shape = tuple(int(s) for s in np.maximum(shape, 1))
        self.grid = np.zeros(self.shape, dtype=np.float64)

    # -- key geometry -------------------------------------------------------

    def keys_of(self, points: np.ndarray) -> np.ndarray:
        return np.floor((np.atleast_2d(points) - self.bmin) / self.resolution).astype(np.int64)

    def centers_of(self, keys: np.ndarray) -> np.ndarray:
        return self.bmin + (np.atleast_2d(keys) + 0.5) * self.resolution

    def in_bounds(self, keys: np.ndarray) -> np.ndarray:
        keys = np.atleast_2d(keys)
        return np.all((keys >= 0) & (keys < np.array(self.shape)), axis=1)

    # -- updates ------------------------------------------------------------

    def insert_rays(self, origin: np.ndarray, endpoints: np.ndarray, hit: np.ndarray) -> None:
        """Insert a batch of rays from one origin; misses carve free space only."""
        endpoints = np.ascontiguousarray(np.atleast_2d(endpoints), dtype=np.float64)
        hit = np.ascontiguousarray(hit, dtype=np.uint8)
        kernels.insert_rays(
            self.grid,
            np.ascontiguousarray(origin, dtype=np.float64),
            endpoints,
            hit,
            np.ascontiguousarray(self.bmin),
            self.resolution,
            self.model.l_occ,
            self.model.l_miss,
            self.model.l_min,
            self.model.l_max,
        )

    def insert_observation(self, cloud: PointCloud, origin: np.ndarray) -> None:
        """Insert a point cloud observed from ``origin``; every point is a hit."""
        if cloud.is_empty:
            return
        self.insert_rays(origin, cloud.points, np.ones(len(cloud), dtype=bool))

    # -- queries ------------------------------------------------------------

    def log_odds(self, keys: np.ndarray) -> np.ndarray:
        keys = np.atleast_2d(keys)
        out = np.zeros(len(keys))
        ok = self.in_bounds(keys)
        kk = keys[ok]
        out[ok] = self.grid[kk[:, 0], kk[:, 1], kk[:, 2]]
        return out

    def probability(self, keys: np.ndarray) -> np.ndarray:
        return occupancy_probability(self.log_odds(keys))

    def state(self, keys: np.ndarray) -> np.ndarray:
        """Tri-state classification per key: FREE / UNKNOWN / OCCUPIED."""
        p = self.probability(keys)
        out = np.full(len(p), UNKNOWN, dtype=object)
        out[p > self.model.p_occ_thresh] = OCCUPIED
        out[p < self.model.p_free_thresh] = FREE
        return out

    def visible_voxels(self, region: set[VoxelKey] | np.ndarray, frustum: Frustum) -> set[VoxelKey]:
        """Frustum-culled visible subset of ``region``.

        Region voxel centers are projected to pixels; along each pixel ray
        (ordered by camera-frame depth) free voxels are transparent while the
        first unknown-or-occupied voxel is included and occludes everything
        behind it. Voxels outside the image or the [near, far] range are
        excluded. Depth ties inside a pixel break by lexicographic voxel key.
        """
        keys = np.array(sorted(region), dtype=np.int64) if isinstance(region, (set, frozenset)) else np.atleast_2d(np.asarray(region, dtype=np.int64))
        chosen = keys[self.visible_mask(keys, frustum)]
        return {(int(a), int(b), int(c)) for a, b, c in chosen}

    def visible_mask(self, keys: np.ndarray, frustum: Frustum, nonfree: np.ndarray | None = None) -> np.ndarray:
        """Boolean visibility mask over a (N, 3) key array (see visible_voxels).

        ``nonfree`` optionally provides the per-key non-free classification,
        letting callers that test many frustums against one region skip the
        repeated map lookup.
        """
        if len(keys) == 0:
            return np.zeros(0, dtype=bool)
        centers = self.centers_of(keys)
        cam = frustum.pose.inverse().apply(centers)
        z = cam[:, 2]
        pix, on_image = frustum.intrinsics.project(cam)
        ok = on_image & (z >= frustum.near) & (z <= frustum.far)
        mask = np.zeros(len(keys), dtype=bool)
        if not np.any(ok):
            return mask
        idx = np.flatnonzero(ok)
        sub = keys[idx]
        zs = z[idx]
        flat_pix = pix[idx, 1] * frustum.intrinsics.width + pix[idx, 0]
        if nonfree is None:
            nonfree = self.probability(sub) >= self.model.p_free_thresh
        else:
            nonfree = nonfree[idx]
        order = np.lexsort((sub[:, 2], sub[:, 1], sub[:, 0], zs, flat_pix))
        include = kernels.first_nonfree_mask(
            np.ascontiguousarray(flat_pix[order]),
            np.ascontiguousarray(nonfree[order], dtype=np.uint8),
        )
        mask[idx[order[include]]] = True
        return mask

    def object_bounding_keys(self, cloud: PointCloud, margin: int = 1) -> np.ndarray:
        """Sorted (N, 3) key array for the cloud's AABB inflated by ``margin`` voxels."""
        if cloud.is_empty:
            raise NoObjectEvidenceError("cannot bound an empty object cloud")
        keys = self.keys_of(cloud.points)
        lo = keys.min(axis=0) - margin
        hi = keys.max(axis=0) + margin
        axes = [np.arange(lo[i], hi[i] + 1) for i in range(3)]
        gx, gy, gz = np.meshgrid(*axes, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1).astype(np.int64)

    def object_bounding_region(self, cloud: PointCloud, margin: int = 1) -> set[VoxelKey]:
        """All voxel keys inside the cloud's AABB inflated by ``margin`` voxels."""
        keys = self.object_bounding_keys(cloud, margin)
        return {(int(a), int(b), int(c)) for a, b, c in keys}

    # -- IO -----------------------------------------------------------------

    def touched_keys(self) -> np.ndarray:
        return np.argwhere(self.grid != 0.0).astype(np.int64)

    def dump(self, path: str) -> None:
        """Binary dump: header + (key, log-odds) records for touched voxels."""
        keys = self.touched_keys()
        values = self.grid[keys[:, 0], keys[:, 1], keys[:, 2]]
        with open(path, "wb") as fh:
            fh.write(_MAP_MAGIC)
            fh.write(struct.pack("<d", self.resolution))
            fh.write(struct.pack("<6d", *self.bmin, *self.bmax))
            fh.write(struct.pack("<2d", self.model.l_min, self.model.l_max))
            fh.write(struct.pack("<q", len(keys)))
            for (i, j, k), v in zip(keys, values):
                fh.write(struct.pack("<3id", int(i), int(j), int(k), float(v)))

    @classmethod
    def load(cls, path: str, model: InverseSensorModel | None = None) -> "OccupancyMap":
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != _MAP_MAGIC:
                raise ValueError(f"{path}: not an occupancy map dump")
            (resolution,) = struct.unpack("<d", fh.read(8))
            bounds = struct.unpack("<6d", fh.read(48))
            l_min, l_max = struct.unpack("<2d", fh.read(16))
            (count,) = struct.unpack("<q", fh.read(8))
            m = model or InverseSensorModel(l_min=l_min, l_max=l_max)
            out = cls(np.array(bounds[:3]), np.array(bounds[3:]), resolution, m)
            for _ in range(count):
                i, j, k, v = struct.unpack("<3id", fh.read(20))
                out.grid[i, j, k] = v
        return out

    def dump_ascii(self, path: str) -> None:
        """Human-readable debug dump of touched voxels."""
        keys = self.touched_keys()
        with open(path, "w") as fh:
            fh.write(f"# resolution {self.resolution}\n")
            fh.write(f"# bounds {self.bmin.tolist()} {self.bmax.tolist()}\n")
            for i, j, k in keys:
                fh.write(f"{i} {j} {k} {self.grid[i, j, k]:.6f}\n")
