"""Pure-python/numpy implementations of the hot kernels.

Same contracts as the compiled module; selected at import when the extension
is unavailable or GRASPNBV_PURE_PYTHON is set.
"""

from __future__ import annotations

import numpy as np


def insert_rays(
    grid: np.ndarray,
    origin: np.ndarray,
    endpoints: np.ndarray,
    hit: np.ndarray,
    bmin: np.ndarray,
    res: float,
    l_occ: float,
    l_miss: float,
    l_min: float,
    l_max: float,
) -> None:
    """Carve free space and mark endpoints for a batch of rays from one origin.

    Every voxel a ray traverses gets l_miss added; the endpoint voxel of a
    hitting ray gets l_occ instead. Endpoints outside the grid degrade to
    pass-through rays truncated at the boundary. Log-odds are clamped to
    [l_min, l_max] after every update. Modifies ``grid`` in place.
    """
    nx, ny, nz = grid.shape
    ox, oy, oz = (float(origin[0]), float(origin[1]), float(origin[2]))
    bx, by, bz = (float(bmin[0]), float(bmin[1]), float(bmin[2]))
    hx, hy, hz = bx + nx * res, by + ny * res, bz + nz * res
    for ridx in range(len(endpoints)):
        ex, ey, ez = endpoints[ridx]
        dx, dy, dz = ex - ox, ey - oy, ez - oz
        seg = np.sqrt(dx * dx + dy * dy + dz * dz)
        if seg == 0.0:
            continue
        dx, dy, dz = dx / seg, dy / seg, dz / seg
        # clip [0, seg] against the grid AABB
        t0, t1 = 0.0, seg
        okay = True
        for o_c, d_c, lo, hi_ in ((ox, dx, bx, hx), (oy, dy, by, hy), (oz, dz, bz, hz)):
            if abs(d_c) < 1e-15:
                if o_c < lo or o_c > hi_:
                    okay = False
                    break
            else:
                ta = (lo - o_c) / d_c
                tb = (hi_ - o_c) / d_c
                if ta > tb:
                    ta, tb = tb, ta
                t0 = max(t0, ta)
                t1 = min(t1, tb)
        if not okay or t0 >= t1:
            continue
        endpoint_inside = bool(hit[ridx]) and (t1 >= seg - 1e-12)
        # voxel of the (possibly clipped) start point, nudged inside
        t_start = t0 + 1e-9
        px, py, pz = ox + dx * t_start, oy + dy * t_start, oz + dz * t_start
        ix = min(max(int((px - bx) / res), 0), nx - 1)
        iy = min(max(int((py - by) / res), 0), ny - 1)
        iz = min(max(int((pz - bz) / res), 0), nz - 1)
        if endpoint_inside:
            tx_end = ox + dx * (seg - 1e-9)
            ty_end = oy + dy * (seg - 1e-9)
            tz_end = oz + dz * (seg - 1e-9)
            jx = min(max(int((tx_end - bx) / res), 0), nx - 1)
            jy = min(max(int((ty_end - by) / res), 0), ny - 1)
            jz = min(max(int((tz_end - bz) / res), 0), nz - 1)
        else:
            jx = jy = jz = -2  # unreachable sentinel
        step_x = 1 if dx > 0 else -1
        step_y = 1 if dy > 0 else -1
        step_z = 1 if dz > 0 else -1
        inf = float("inf")
        t_max_x = ((bx + (ix + (step_x > 0)) * res) - ox) / dx if dx != 0 else inf
        t_max_y = ((by + (iy + (step_y > 0)) * res) - oy) / dy if dy != 0 else inf
        t_max_z = ((bz + (iz + (step_z > 0)) * res) - oz) / dz if dz != 0 else inf
        t_dx = abs(res / dx) if dx != 0 else inf
        t_dy = abs(res / dy) if dy != 0 else inf
        t_dz = abs(res / dz) if dz != 0 else inf
        t_stop = min(t1, seg)
        while True:
            at_endpoint = ix == jx and iy == jy and iz == jz
            if at_endpoint:
                v = grid[ix, iy, iz] + l_occ
            else:
                v = grid[ix, iy, iz] + l_miss
            grid[ix, iy, iz] = l_max if v > l_max else (l_min if v < l_min else v)
            if at_endpoint:
                break
            if t_max_x <= t_max_y and t_max_x <= t_max_z:
                if t_max_x > t_stop:
                    break
                ix += step_x
                t_max_x += t_dx
                if ix < 0 or ix >= nx:
                    break
            elif t_max_y <= t_max_z:
                if t_max_y > t_stop:
                    break
                iy += step_y
                t_max_y += t_dy
                if iy < 0 or iy >= ny:
                    break
            else:
                if t_max_z > t_stop:
                    break
                iz += step_z
                t_max_z += t_dz
                if iz < 0 or iz >= nz:
                    break


def first_nonfree_mask(sorted_pixels: np.ndarray, sorted_nonfree: np.ndarray) -> np.ndarray:
    """Per-pixel-ray transparency walk over depth-sorted voxel projections.

    Input arrays must be sorted by (pixel, depth, tiebreak). Within each pixel
    group, entries are included while no non-free voxel precedes them; the
    first non-free entry is included and terminates the group.
    """
    n = len(sorted_pixels)
    if n == 0:
        return np.zeros(0, dtype=bool)
    nf = sorted_nonfree.astype(np.int64)
    cs_excl = np.concatenate([[0], np.cumsum(nf)[:-1]])
    new_group = np.concatenate([[True], sorted_pixels[1:] != sorted_pixels[:-1]])
    group_id = np.cumsum(new_group) - 1
    group_base = cs_excl[new_group][group_id]
    return (cs_excl - group_base) == 0
