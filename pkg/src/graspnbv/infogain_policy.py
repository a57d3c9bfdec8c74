"""Information-gain view selection: average predicted gain over visible voxels.

Used when no grasp contacts exist; the candidate region is the voxelised
bounding box of the current object cloud, which the selection gradually
"sculpts" until no view brings appreciable gain.
"""

from __future__ import annotations

import numpy as np

from .camera import CameraIntrinsics, Frustum, ViewCandidate
from .contact_policy import ViewsExhaustedError
from .occupancy import OccupancyMap, VoxelKey, information_gain


def region_keys(region: set[VoxelKey] | np.ndarray) -> np.ndarray:
    """Region as a sorted (N, 3) int64 key array; selection loops convert once."""
    if isinstance(region, np.ndarray):
        return region
    if not region:
        return np.zeros((0, 3), dtype=np.int64)
    return np.array(sorted(region), dtype=np.int64)


def region_gain_arrays(occ_map: OccupancyMap, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-key (nonfree mask, floored unknown-voxel gain) for a region.

    Computed once per selection round and shared across all candidate views,
    since the map does not change between their utility evaluations.
    """
    p = occ_map.probability(keys)
    model = occ_map.model
    nonfree = p >= model.p_free_thresh
    unknown = nonfree & (p <= model.p_occ_thresh)
    gains = np.zeros(len(keys))
    if np.any(unknown):
        gains[unknown] = np.maximum(information_gain(occ_map.log_odds(keys[unknown]), model), 0.0)
    return nonfree, gains


def view_infogain_utility(
    occ_map: OccupancyMap,
    region: set[VoxelKey] | np.ndarray,
    view: ViewCandidate,
    intrinsics: CameraIntrinsics,
    near: float = 0.05,
    far: float = 2.0,
    _region_arrays: tuple[np.ndarray, np.ndarray] | None = None,
) -> float:
    """Average information gain (nats/voxel) over the voxels visible from ``view``.

    Only unknown-classified voxels contribute, with their gain floored at
    zero; voxels already classified free or occupied are pinned at the
    log-odds clamps, where the unclamped imaginary-measurement gain never
    decays, and counting them would keep utilities away from the entropy
    plateau no matter how much has been observed. The average is still taken
    over the full visible set. Views with an empty visible set score 0 so
    they lose the argmax without being special-cased out of it.
    """
    frustum = Frustum(pose=view.pose, intrinsics=intrinsics, near=near, far=far)
    keys = region_keys(region)
    nonfree, gains = _region_arrays if _region_arrays is not None else region_gain_arrays(occ_map, keys)
    mask = occ_map.visible_mask(keys, frustum, nonfree=nonfree)
    count = int(np.count_nonzero(mask))
    if count == 0:
        return 0.0
    return float(np.sum(gains[mask]) / count)


def select_infogain_view(
    candidates: list[ViewCandidate],
    visited: list[ViewCandidate],
    occ_map: OccupancyMap,
    region: set[VoxelKey],
    intrinsics: CameraIntrinsics,
    near: float = 0.05,
    far: float = 2.0,
) -> ViewCandidate:
    """Unvisited candidate with maximum average gain; ties break to lowest index."""
    visited_ids = {v.index for v in visited}
    pool = sorted((c for c in candidates if c.index not in visited_ids), key=lambda c: c.index)
    if not pool:
        raise ViewsExhaustedError("no unvisited candidate views remain")
    keys = region_keys(region)
    arrays = region_gain_arrays(occ_map, keys)
    return max(
        pool,
        key=lambda c: (
            view_infogain_utility(occ_map, keys, c, intrinsics, near, far, _region_arrays=arrays),
            -c.index,
        ),
    )


def gain_table(
    candidates: list[ViewCandidate],
    occ_map: OccupancyMap,
    region: set[VoxelKey],
    intrinsics: CameraIntrinsics,
    near: float = 0.05,
    far: float = 2.0,
) -> list[tuple[int, float]]:
    """(view index, average gain) rows for CSV export."""
    keys = region_keys(region)
    arrays = region_gain_arrays(occ_map, keys)
    return [
        (c.index, view_infogain_utility(occ_map, keys, c, intrinsics, near, far, _region_arrays=arrays))
        for c in candidates
    ]
