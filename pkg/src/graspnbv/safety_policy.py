"""Safety view planning: swept-volume voxels, collision probability, view selection.

The hand is a small set of convex links (boxes and capsules) rigidly attached
to the wrist, with the two finger links sliding along the local x axis as the
aperture changes. Sweeping the hand along a reach-to-grasp trajectory yields
the voxels whose occupancy decides whether the trajectory is safe to execute.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import CameraIntrinsics, ViewCandidate
from .contact_policy import Contact, FingerLinkNormals
from .geometry import Pose, quat_to_matrix
from .infogain_policy import region_gain_arrays, region_keys, view_infogain_utility
from .contact_policy import ViewsExhaustedError
from .occupancy import OccupancyMap, VoxelKey


class TrajectoryOutOfWorkspaceError(ValueError):
    """A trajectory waypoint leaves the workspace bounds."""


@dataclass(frozen=True)
class CapsuleLink:
    """Capsule from p0 to p1 (local frame) with given radius."""

    p0: np.ndarray
    p1: np.ndarray
    radius: float


@dataclass(frozen=True)
class BoxLink:
    """Axis-aligned box in the local frame, centred at ``center``."""

    center: np.ndarray
    size: np.ndarray


@dataclass(frozen=True)
class HandLink:
    name: str
    geometry: CapsuleLink | BoxLink
    # local outward normal of the contacting pad; None for non-contact links
    pad_normal: np.ndarray | None = None
    # +1 / -1: the link slides along local x with aperture, 0: fixed
    aperture_side: int = 0


@dataclass(frozen=True)
class HandModel:
    """Hand links with fixed wrist-relative transforms; local +z is the approach axis."""

    links: tuple[HandLink, ...]

    def __post_init__(self):
        if not self.links:
            raise ValueError("hand model needs at least one link")

    def world_geometries(self, wrist: Pose, aperture: float) -> list[tuple[str, object]]:
        """Posed link geometries: ('capsule', p0, p1, r) or ('box', pose, size)."""
        out = []
        for link in self.links:
            shift = np.array([link.aperture_side * aperture / 2.0, 0.0, 0.0])
            g = link.geometry
            if isinstance(g, CapsuleLink):
                out.append(("capsule", wrist.apply(g.p0 + shift), wrist.apply(g.p1 + shift), g.radius))
            else:
                out.append(("box", Pose(wrist.rotation, wrist.apply(g.center + shift)), g.size))
        return out

    def finger_normals(self, wrist: Pose) -> FingerLinkNormals:
        """World-frame outward pad normals of the contact links at a wrist pose."""
        pads = [link.pad_normal for link in self.links if link.pad_normal is not None]
        if not pads:
            raise ValueError("hand model has no contact links")
        return FingerLinkNormals(wrist.rotate(np.asarray(pads)))

    def extent_radius(self, aperture: float) -> float:
        """Radius of a wrist-centred ball containing every link."""
        r = 0.0
        for link in self.links:
            shift = np.array([link.aperture_side * aperture / 2.0, 0.0, 0.0])
            g = link.geometry
            if isinstance(g, CapsuleLink):
                r = max(r, np.linalg.norm(g.p0 + shift) + g.radius, np.linalg.norm(g.p1 + shift) + g.radius)
            else:
                r = max(r, np.linalg.norm(g.center + shift) + np.linalg.norm(g.size) / 2.0)
        return r


def two_finger_hand(
    finger_length: float = 0.08,
    finger_radius: float = 0.008,
    palm_size: tuple[float, float, float] = (0.09, 0.03, 0.03),
) -> HandModel:
    """Parallel-jaw pinch hand: palm box plus two finger capsules along +z."""
    palm = HandLink(
        "palm",
        BoxLink(center=np.array([0.0, 0.0, -palm_size[2] / 2.0]), size=np.asarray(palm_size, dtype=float)),
    )
    fingers = [
        HandLink(
            f"finger_{side:+d}",
            CapsuleLink(
                p0=np.array([0.0, 0.0, 0.0]),
                p1=np.array([0.0, 0.0, finger_length]),
                radius=finger_radius,
            ),
            # the contacting pad faces inward, toward the object between the fingers
            pad_normal=np.array([-float(side), 0.0, 0.0]),
            aperture_side=side,
        )
        for side in (-1, 1)
    ]
    return HandModel(links=(palm, *fingers))


@dataclass(frozen=True)
class Trajectory:
    """Reach-to-grasp motion: ordered (wrist pose, aperture) waypoints.

    The final waypoint is the grasp closure configuration.
    """

    poses: tuple[Pose, ...]
    apertures: tuple[float, ...]

    def __post_init__(self):
        if len(self.poses) < 2 or len(self.poses) != len(self.apertures):
            raise ValueError("trajectory needs >= 2 aligned (pose, aperture) waypoints")

    @property
    def final_pose(self) -> Pose:
        return self.poses[-1]

    @property
    def final_aperture(self) -> float:
        return self.apertures[-1]


def _candidate_keys(occ_map: OccupancyMap, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """All map keys inside a world AABB, clipped to the grid."""
    k_lo = np.maximum(occ_map.keys_of(lo)[0], 0)
    k_hi = np.minimum(occ_map.keys_of(hi)[0], np.array(occ_map.shape) - 1)
    if np.any(k_lo > k_hi):
        return np.zeros((0, 3), dtype=np.int64)
    axes = [np.arange(k_lo[i], k_hi[i] + 1) for i in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)


def _segment_distance(centers: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    seg = p1 - p0
    ll = float(seg @ seg)
    t = np.clip((centers - p0) @ seg / ll, 0.0, 1.0) if ll > 0 else np.zeros(len(centers))
    return np.linalg.norm(centers - (p0 + t[:, None] * seg), axis=1)


def _min_segment_distance(centers: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """Min distance from each center (N, 3) to any of S segments (S, 3)/(S, 3)."""
    seg = p1 - p0
    ll = np.einsum("sj,sj->s", seg, seg)
    diff = centers[:, None, :] - p0[None, :, :]
    t = np.einsum("nsj,sj->ns", diff, seg) / np.where(ll > 0, ll, 1.0)
    np.clip(t, 0.0, 1.0, out=t)
    closest = diff - t[:, :, None] * seg[None, :, :]
    d2 = np.einsum("nsj,nsj->ns", closest, closest)
    return np.sqrt(np.min(d2, axis=1))


def swept_voxels(
    occ_map: OccupancyMap,
    hand: HandModel,
    traj: Trajectory,
    contacts: list[Contact] | None = None,
    r_contact: float | None = None,
) -> set[VoxelKey]:
    """Voxels the hand passes through along the trajectory.

    Poses are interpolated so no link moves more than half a voxel between
    consecutive samples (no tunneling); overlap tests inflate each link by
    half a voxel diagonal, which keeps the set stable under further
    oversampling. Voxels within ``r_contact`` (default: 2 voxel edges) of any
    planned contact point are excluded.
    """
    res = occ_map.resolution
    for pose in traj.poses:
        t = pose.translation
        if np.any(t < occ_map.bmin) or np.any(t > occ_map.bmax):
            raise TrajectoryOutOfWorkspaceError(f"waypoint at {t} leaves the workspace")
    inflate = res * np.sqrt(3.0) / 2.0
    keys: set[VoxelKey] = set()
    for a, b, ap_a, ap_b in zip(traj.poses[:-1], traj.poses[1:], traj.apertures[:-1], traj.apertures[1:]):
        radius = hand.extent_radius(max(ap_a, ap_b))
        lin = np.linalg.norm(b.translation - a.translation)
        ang = 2.0 * np.arccos(np.clip(abs(float(np.dot(a.rotation, b.rotation))), 0.0, 1.0))
        travel = lin + ang * radius + abs(ap_b - ap_a) / 2.0
        steps = max(1, int(np.ceil(travel / (res / 2.0))))
        us = np.linspace(0.0, 1.0, steps + 1)
        # posed geometries at every sample, grouped per link
        per_link: list[list] = [[] for _ in hand.links]
        for u in us:
            pose = a.interpolate(b, float(u))
            aperture = (1 - u) * ap_a + u * ap_b
            for li, geom in enumerate(hand.world_geometries(pose, aperture)):
                per_link[li].append(geom)
        for geoms in per_link:
            if geoms[0][0] == "capsule":
                pad = geoms[0][3] + inflate
                p0s = np.array([g[1] for g in geoms])
                p1s = np.array([g[2] for g in geoms])
                lo = np.minimum(p0s, p1s).min(axis=0) - pad
                hi = np.maximum(p0s, p1s).max(axis=0) + pad
                cand = _candidate_keys(occ_map, lo, hi)
                if len(cand) == 0:
                    continue
                centers = occ_map.centers_of(cand)
                hitmask = _min_segment_distance(centers, p0s, p1s) <= pad
            else:
                size = geoms[0][2]
                half = size / 2.0 + inflate
                half_diag = np.linalg.norm(size) / 2.0 + inflate
                rots = np.array([quat_to_matrix(g[1].rotation) for g in geoms])
                ctrs = np.array([g[1].translation for g in geoms])
                lo = ctrs.min(axis=0) - half_diag
                hi = ctrs.max(axis=0) + half_diag
                cand = _candidate_keys(occ_map, lo, hi)
                if len(cand) == 0:
                    continue
                centers = occ_map.centers_of(cand)
                # coarse cull against the box-center polyline before the exact test
                hitmask = np.zeros(len(cand), dtype=bool)
                if len(ctrs) > 1:
                    rough = _min_segment_distance(centers, ctrs[:-1], ctrs[1:]) <= half_diag
                else:
                    rough = np.linalg.norm(centers - ctrs[0], axis=1) <= half_diag
                if np.any(rough):
                    # box-local coordinates of the surviving centers at every sample pose
                    local = np.einsum(
                        "nsj,sjk->nsk", centers[rough][:, None, :] - ctrs[None, :, :], rots
                    )
                    hitmask[rough] = np.any(np.all(np.abs(local) <= half, axis=2), axis=1)
            for i, j, k in cand[hitmask]:
                keys.add((int(i), int(j), int(k)))
    if contacts:
        rc = r_contact if r_contact is not None else 2.0 * res
        if keys:
            arr = np.array(sorted(keys), dtype=np.int64)
            centers = occ_map.centers_of(arr)
            near = np.zeros(len(arr), dtype=bool)
            for c in contacts:
                near |= np.linalg.norm(centers - c.position, axis=1) <= rc
            keys = {(int(a_), int(b_), int(c_)) for a_, b_, c_ in arr[~near]}
    return keys


def swept_probabilities(occ_map: OccupancyMap, voxels: set[VoxelKey]) -> np.ndarray:
    """Per-voxel occupancy probabilities entering the collision product.

    Voxels classified free contribute exactly 0: their residual clamp
    probability is a map artifact, and summing it over a few thousand swept
    voxels would drive every trajectory to near-certain collision no matter
    how thoroughly the corridor was observed. Unknown voxels keep the 0.5
    prior, which is what makes unexplored sweeps register as unsafe.
    """
    if not voxels:
        return np.zeros(0)
    keys = np.array(sorted(voxels), dtype=np.int64)
    p = occ_map.probability(keys)
    return np.where(p < occ_map.model.p_free_thresh, 0.0, p)


def kappa_from_probabilities(p: np.ndarray) -> float:
    """kappa = sum ln(1 - p); -inf if any p = 1 (handled symbolically)."""
    p = np.asarray(p, dtype=float)
    if np.any(p >= 1.0):
        return -np.inf
    return float(np.sum(np.log1p(-p)))


def probability_from_kappa(kappa: float) -> float:
    return 1.0 if kappa == -np.inf else float(1.0 - np.exp(kappa))


def collision_kappa(occ_map: OccupancyMap, voxels: set[VoxelKey]) -> float:
    """Log-probability that every swept voxel is free; -inf if any voxel has p = 1."""
    return kappa_from_probabilities(swept_probabilities(occ_map, voxels))


def collision_probability(occ_map: OccupancyMap, voxels: set[VoxelKey]) -> float:
    """Probability that the swept volume contains at least one occupied voxel.

    Computed through the numerically stable log form kappa = sum ln(1 - p);
    any voxel at p = 1 makes the result exactly 1.
    """
    return probability_from_kappa(collision_kappa(occ_map, voxels))


@dataclass(frozen=True)
class CollisionReport:
    """Per-trajectory safety record for structured logging."""

    kappa: float
    probability: float
    voxel_count: int
    riskiest: list[tuple[VoxelKey, float]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "p_collision": self.probability,
            "swept_voxels": self.voxel_count,
            "riskiest": [{"key": list(k), "p": p} for k, p in self.riskiest],
        }


def collision_report(occ_map: OccupancyMap, voxels: set[VoxelKey], top_k: int = 10) -> CollisionReport:
    kappa = collision_kappa(occ_map, voxels)
    prob = 1.0 if kappa == -np.inf else float(1.0 - np.exp(kappa))
    riskiest: list[tuple[VoxelKey, float]] = []
    if voxels:
        keys = np.array(sorted(voxels), dtype=np.int64)
        p = occ_map.probability(keys)
        order = np.argsort(-p, kind="stable")[:top_k]
        riskiest = [((int(a), int(b), int(c)), float(p[i])) for i, (a, b, c) in zip(order, keys[order])]
    return CollisionReport(kappa=kappa, probability=prob, voxel_count=len(voxels), riskiest=riskiest)


def select_safety_view(
    candidates: list[ViewCandidate],
    visited: list[ViewCandidate],
    occ_map: OccupancyMap,
    swept: set[VoxelKey],
    intrinsics: CameraIntrinsics,
    near: float = 0.05,
    far: float = 2.0,
) -> tuple[ViewCandidate, float]:
    """Unvisited view with maximum average gain over the swept voxels, plus that value."""
    visited_ids = {v.index for v in visited}
    pool = sorted((c for c in candidates if c.index not in visited_ids), key=lambda c: c.index)
    if not pool:
        raise ViewsExhaustedError("no unvisited candidate views remain")
    keys = region_keys(swept)
    arrays = region_gain_arrays(occ_map, keys)
    scored = [
        (view_infogain_utility(occ_map, keys, c, intrinsics, near, far, _region_arrays=arrays), -c.index, c)
        for c in pool
    ]
    utility, _, best = max(scored)
    return best, utility
