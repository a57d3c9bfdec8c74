"""Heuristic pinch-grasp hypothesis generation and a ground-truth grasp oracle.

The generator stands in for a learned grasp planner behind a small interface:
given a partial object cloud it proposes an antipodal two-finger pinch,
synthesizes a straight-line approach trajectory, and extracts weighted
contact points with exponential distance falloff. Thin observed surfaces are
assumed graspable from both sides: when only one side of a surface has been
seen, the hypothesis carries a virtual back-side contact whose normal is the
observed normal negated. A later view of the back side either confirms a real
antipodal pair or reveals solid material there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contact_policy import Contact, ContactObservation, FingerLinkNormals
from .geometry import Pose, normalized
from .pointcloud import PointCloud, voxel_downsample
from .safety_policy import HandModel, Trajectory, two_finger_hand
from .scene import SceneModel


@dataclass(frozen=True)
class GraspParams:
    """Knobs of the heuristic pinch generator (stand-in for a learned grasp model)."""

    aperture_max: float = 0.10
    min_separation: float = 0.012
    pair_normal_tol_deg: float = 30.0
    approach_standoff: float = 0.15
    weight_falloff: float = 0.01  # metres; exp(-d / falloff)
    # fingers stop this short of the contacts: wide enough that the swept
    # volume's conservative voxel capture clears the band of surface-adjacent
    # voxels whose occupancy stays ambiguous under depth noise
    closure_clearance: float = 0.016
    fingertip_radius: float = 0.015
    virtual_pair_score: float = 0.25
    subsample_resolution: float = 0.01
    max_points: int = 250
    max_candidates: int = 50  # ranked pairs to try before giving up


@dataclass(frozen=True)
class GraspHypothesis:
    """A ranked pinch: trajectory, weighted contacts, finger pad normals."""

    trajectory: Trajectory
    contacts: list[Contact]
    finger_normals: FingerLinkNormals
    score: float
    # the two planned fingertip contacts (second one may be virtual back-side)
    planned_contacts: tuple[Contact, Contact] = field(default=None)  # type: ignore[assignment]
    virtual_back: bool = False

    def observations(self) -> list[ContactObservation]:
        return [ContactObservation(contact=c) for c in self.contacts]

    def as_dict(self) -> dict:
        return {
            "score": self.score,
            "virtual_back": self.virtual_back,
            "waypoints": [
                {"rotation": p.rotation.tolist(), "translation": p.translation.tolist(), "aperture": a}
                for p, a in zip(self.trajectory.poses, self.trajectory.apertures)
            ],
            "contacts": [
                {"weight": c.weight, "position": c.position.tolist(), "normal": c.normal.tolist()}
                for c in self.contacts
            ],
            "finger_normals": self.finger_normals.normals.tolist(),
        }


def _subsample(cloud: PointCloud, params: GraspParams) -> PointCloud:
    cloud = voxel_downsample(cloud, params.subsample_resolution)
    if len(cloud) > params.max_points:
        idx = np.linspace(0, len(cloud) - 1, params.max_points).astype(int)
        cloud = PointCloud(cloud.points[idx], cloud.normals[idx])
    return cloud


def _approach_direction(axis: np.ndarray) -> np.ndarray:
    """Approach perpendicular to the finger-separation axis, preferring top-down."""
    down = np.array([0.0, 0.0, -1.0])
    a = down - np.dot(down, axis) * axis
    if np.linalg.norm(a) < 0.3:
        side = np.array([1.0, 0.0, 0.0])
        a = side - np.dot(side, axis) * axis
        if np.linalg.norm(a) < 1e-6:
            side = np.array([0.0, 1.0, 0.0])
            a = side - np.dot(side, axis) * axis
    return normalized(a)


def _wrist_pose(axis: np.ndarray, approach: np.ndarray, fingertip_target: np.ndarray, finger_length: float) -> Pose:
    """Wrist frame with local x = finger axis, local z = approach."""
    z = approach
    x = normalized(axis - np.dot(axis, z) * z)
    y = np.cross(z, x)
    m = np.eye(4)
    m[:3, 0], m[:3, 1], m[:3, 2] = x, y, z
    m[:3, 3] = fingertip_target - finger_length * z
    return Pose.from_matrix(m)


def _build_hypothesis(
    p1: np.ndarray,
    n1: np.ndarray,
    p2: np.ndarray,
    n2: np.ndarray,
    score: float,
    virtual_back: bool,
    cloud: PointCloud,
    params: GraspParams,
    hand: HandModel,
    workspace_min: np.ndarray | None,
    workspace_max: np.ndarray | None,
) -> GraspHypothesis:
    sep = p2 - p1
    dist = float(np.linalg.norm(sep))
    axis = sep / dist if dist > 1e-9 else n1.copy()
    mid = (p1 + p2) / 2.0
    approach = _approach_direction(axis)
    finger_length = _finger_length(hand)
    finger_radius = _finger_radius(hand)
    final = _wrist_pose(axis, approach, mid, finger_length)
    start_t = final.translation - params.approach_standoff * approach
    if workspace_min is not None and workspace_max is not None:
        margin = 1e-3
        start_t = np.clip(start_t, workspace_min + margin, workspace_max - margin)
    start = Pose(final.rotation, start_t)
    # descend fully open, then close in place; the clearance keeps the finger
    # surfaces just short of the planned contact points so the sweep does not
    # rake along the object surface outside the contact-exclusion radius
    close = min(dist + 2.0 * finger_radius + params.closure_clearance, params.aperture_max)
    traj = Trajectory(
        poses=(start, final, final),
        apertures=(params.aperture_max, params.aperture_max, close),
    )
    planned = (
        Contact(weight=0.5, position=p1, normal=n1),
        Contact(weight=0.5, position=p2, normal=n2),
    )
    contacts = _weighted_contacts(cloud, planned, params, virtual_back)
    fingers = hand.finger_normals(final)
    return GraspHypothesis(
        trajectory=traj,
        contacts=contacts,
        finger_normals=fingers,
        score=score,
        planned_contacts=planned,
        virtual_back=virtual_back,
    )


def _finger_length(hand: HandModel) -> float:
    for link in hand.links:
        if link.pad_normal is not None and hasattr(link.geometry, "p1"):
            return float(link.geometry.p1[2])
    return 0.08


def _finger_radius(hand: HandModel) -> float:
    for link in hand.links:
        if link.pad_normal is not None and hasattr(link.geometry, "radius"):
            return float(link.geometry.radius)
    return 0.008


def _weighted_contacts(
    cloud: PointCloud,
    planned: tuple[Contact, Contact],
    params: GraspParams,
    virtual_back: bool,
) -> list[Contact]:
    """Cloud points near either planned fingertip, weights exp(-d/falloff), normalized."""
    raw: list[tuple[float, np.ndarray, np.ndarray]] = []
    for k, pc in enumerate(planned):
        if virtual_back and k == 1:
            # the virtual back contact itself, full relevance
            raw.append((1.0, pc.position, pc.normal))
            continue
        d = np.linalg.norm(cloud.points - pc.position, axis=1)
        near = d <= params.fingertip_radius
        for dist, pt, nrm in zip(d[near], cloud.points[near], cloud.normals[near]):
            raw.append((float(np.exp(-dist / params.weight_falloff)), pt, nrm))
    total = sum(w for w, _, _ in raw)
    return [Contact(weight=w / total, position=p, normal=n) for w, p, n in raw]


def find_grasp(
    cloud: PointCloud,
    params: GraspParams = GraspParams(),
    hand: HandModel | None = None,
    workspace_min: np.ndarray | None = None,
    workspace_max: np.ndarray | None = None,
) -> GraspHypothesis | None:
    """Best-ranked pinch hypothesis for the current object cloud, or None.

    Real antipodal point pairs (opposing normals, separation within the hand
    aperture) are ranked by antipodality times local cloud density; when only
    single-sided surface evidence exists, thin-surface virtual pairs keep the
    generator productive. Deterministic for a fixed cloud and params.
    """
    if cloud.is_empty:
        return None
    hand = hand or two_finger_hand()
    sub = _subsample(cloud, params)
    pts = sub.points
    nrm = sub.normals
    n = len(pts)
    cos_tol = np.cos(np.radians(params.pair_normal_tol_deg))

    # ranked candidate stream: (rank, i, j) with j == -1 for a virtual pair
    candidates: list[tuple[float, int, int]] = []
    diff = pts[None, :, :] - pts[:, None, :]
    dist = np.linalg.norm(diff, axis=2)
    iu, ju = np.triu_indices(n, k=1)
    d_ij = dist[iu, ju]
    in_range = (d_ij >= params.min_separation) & (d_ij <= params.aperture_max)
    if np.any(in_range):
        ii = iu[in_range]
        jj = ju[in_range]
        u = diff[ii, jj] / d_ij[in_range][:, None]
        a1 = -np.sum(nrm[ii] * u, axis=1)  # normal at i vs axis toward i
        a2 = np.sum(nrm[jj] * u, axis=1)
        ok = (a1 >= cos_tol) & (a2 >= cos_tol)
        if np.any(ok):
            score = (a1 + a2) / 2.0
            dens = _pair_density(pts, ii, jj, dist, params.fingertip_radius)
            rank = score * dens
            for k in np.flatnonzero(ok):
                candidates.append((float(rank[k]), int(ii[k]), int(jj[k])))

    # thin-surface fallback: virtual back contacts at dense cloud points
    virt_dens = np.sum(dist <= params.fingertip_radius, axis=1).astype(float)
    virt_rank = params.virtual_pair_score * virt_dens
    for k in range(n):
        if virt_rank[k] > 0:
            candidates.append((float(virt_rank[k]), int(k), -1))

    # try pairs best-first; skip any whose hand would dip below the floor
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    for score, i, j in candidates[: params.max_candidates]:
        if score <= 0:
            break
        if j >= 0:
            hyp = _build_hypothesis(
                pts[i], nrm[i], pts[j], nrm[j], score, False, sub, params, hand, workspace_min, workspace_max
            )
        else:
            hyp = _build_hypothesis(
                pts[i], nrm[i], pts[i].copy(), -nrm[i], score, True, sub, params, hand, workspace_min, workspace_max
            )
        if workspace_min is None or _hand_above_floor(hand, hyp.trajectory, float(workspace_min[2])):
            return hyp
    return None


def _hand_above_floor(hand: HandModel, traj: Trajectory, floor: float, margin: float = 1e-3) -> bool:
    """True if no hand link dips below the workspace floor at any waypoint."""
    for pose, aperture in zip(traj.poses, traj.apertures):
        for geom in hand.world_geometries(pose, aperture):
            if geom[0] == "capsule":
                low = min(geom[1][2], geom[2][2]) - geom[3]
            else:
                box_pose, size = geom[1], geom[2]
                corners = np.array(
                    [[sx * size[0] / 2, sy * size[1] / 2, sz * size[2] / 2]
                     for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]
                )
                low = float(np.min(box_pose.apply(corners)[:, 2]))
            if low < floor + margin:
                return False
    return True


def _pair_density(pts, ii, jj, dist, radius) -> np.ndarray:
    counts = np.sum(dist <= radius, axis=1).astype(float)
    return counts[ii] + counts[jj]


# ---------------------------------------------------------------------------
# ground-truth oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraspOutcome:
    """Full-knowledge verdict on a hypothesis: safe AND stable = success."""

    safe: bool
    stable: bool
    details: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.safe and self.stable


@dataclass(frozen=True)
class OracleParams:
    contact_tol: float = 0.005  # one voxel at default resolution
    normal_tol_deg: float = 20.0
    antipodal_tol_deg: float = 30.0
    r_contact: float = 0.01  # two voxel edges
    sweep_step: float = 0.0025


def ground_truth_grasp_oracle(
    scene: SceneModel,
    hypothesis: GraspHypothesis,
    hand: HandModel | None = None,
    params: OracleParams = OracleParams(),
) -> GraspOutcome:
    """Judge a hypothesis against the full ground-truth scene.

    Unsafe if the hand intersects any scene solid (or the table) along the
    trajectory outside the contact region; unstable if the planned contacts
    miss the true surface, disagree with true normals, or fail an
    antipodality check.
    """
    hand = hand or two_finger_hand()
    safe, hit_info = _sweep_is_safe(scene, hypothesis, hand, params)
    stable, stab_info = _contacts_are_stable(scene, hypothesis, params)
    return GraspOutcome(safe=safe, stable=stable, details={**hit_info, **stab_info})


def _sweep_is_safe(scene, hypothesis, hand, params) -> tuple[bool, dict]:
    traj = hypothesis.trajectory
    contacts = [c.position for c in hypothesis.planned_contacts]
    for a, b, ap_a, ap_b in zip(traj.poses[:-1], traj.poses[1:], traj.apertures[:-1], traj.apertures[1:]):
        radius = hand.extent_radius(max(ap_a, ap_b))
        lin = np.linalg.norm(b.translation - a.translation)
        ang = 2.0 * np.arccos(np.clip(abs(float(np.dot(a.rotation, b.rotation))), 0.0, 1.0))
        travel = lin + ang * radius + abs(ap_b - ap_a) / 2.0
        steps = max(1, int(np.ceil(travel / params.sweep_step)))
        for s in range(steps + 1):
            u = s / steps
            pose = a.interpolate(b, u)
            aperture = (1 - u) * ap_a + u * ap_b
            for geom in hand.world_geometries(pose, aperture):
                pts, pad = _geom_probe_points(geom, params.sweep_step)
                hit = scene.contains(pts, include_table=False)
                d_surf, _ = scene.surface_query(pts)
                hit |= d_surf <= pad
                hit |= (pts[:, 2] - pad) <= scene.table_height
                if np.any(hit):
                    bad = pts[hit]
                    excl = np.zeros(len(bad), dtype=bool)
                    for c in contacts:
                        excl |= np.linalg.norm(bad - c, axis=1) <= params.r_contact
                    if np.any(~excl):
                        where = bad[~excl][0]
                        return False, {"collision_point": where.tolist()}
    return True, {}


def _geom_probe_points(geom, step) -> tuple[np.ndarray, float]:
    """Sample points representing a link volume, plus the pad radius around them."""
    if geom[0] == "capsule":
        _, p0, p1, radius = geom
        length = np.linalg.norm(p1 - p0)
        k = max(2, int(np.ceil(length / step)) + 1)
        t = np.linspace(0.0, 1.0, k)
        return p0 + t[:, None] * (p1 - p0), radius
    _, pose, size = geom
    half = size / 2.0
    counts = np.maximum((size / step).astype(int), 1) + 1
    axes = [np.linspace(-half[i], half[i], counts[i]) for i in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    local = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    return pose.apply(local), 0.0


def _contacts_are_stable(scene, hypothesis, params) -> tuple[bool, dict]:
    tol_cos = np.cos(np.radians(params.normal_tol_deg))
    for idx, contact in enumerate(hypothesis.planned_contacts):
        ok, why = _contact_on_surface(scene, contact.position, contact.normal, params, tol_cos)
        if not ok:
            return False, {"unstable_contact": idx, "reason": why}
    c1, c2 = hypothesis.planned_contacts
    if float(np.dot(c1.normal, c2.normal)) > -np.cos(np.radians(params.antipodal_tol_deg)):
        return False, {"reason": "contact normals are not antipodal"}
    axis = c2.position - c1.position
    if np.linalg.norm(axis) > 1e-9:
        u = axis / np.linalg.norm(axis)
        if float(np.dot(c2.normal, u)) < np.cos(np.radians(params.antipodal_tol_deg + 15.0)):
            return False, {"reason": "contact axis misaligned with normals"}
    return True, {}


def _contact_on_surface(scene, position, normal, params, tol_cos) -> tuple[bool, str]:
    """True surface within contact_tol of the planned point, with a matching normal.

    Probes by casting back along the planned normal from just outside the
    expected surface; a probe origin buried inside material means the contact
    was planned on a face that does not exist.
    """
    start = position + params.contact_tol * normal
    if bool(scene.contains(start[None, :], include_table=False)[0]):
        return False, "probe origin inside material"
    t, n = scene.raycast(start[None, :], -normal[None, :], include_table=False)
    if not np.isfinite(t[0]) or t[0] > 2.0 * params.contact_tol:
        return False, "no surface within tolerance"
    if float(np.dot(n[0], normal)) < tol_cos:
        return False, "surface normal mismatch"
    return True, ""
