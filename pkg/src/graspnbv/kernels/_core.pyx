# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: log-odds ray insertion and the visibility walk."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

from libc.math cimport INFINITY, fabs, sqrt


def insert_rays(
    double[:, :, ::1] grid,
    double[::1] origin,
    double[:, ::1] endpoints,
    cnp.uint8_t[::1] hit,
    double[::1] bmin,
    double res,
    double l_occ,
    double l_miss,
    double l_min,
    double l_max,
):
    """See graspnbv.kernels._py.insert_rays; identical contract."""
    cdef Py_ssize_t nx = grid.shape[0]
    cdef Py_ssize_t ny = grid.shape[1]
    cdef Py_ssize_t nz = grid.shape[2]
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double bx = bmin[0], by = bmin[1], bz = bmin[2]
    cdef double hx = bx + nx * res, hy = by + ny * res, hz = bz + nz * res
    cdef Py_ssize_t ridx, n_rays = endpoints.shape[0]
    cdef double ex, ey, ez, dx, dy, dz, seg, t0, t1, ta, tb
    cdef double px, py, pz, t_start, v
    cdef double t_max_x, t_max_y, t_max_z, t_dx, t_dy, t_dz, t_stop
    cdef Py_ssize_t ix, iy, iz, jx, jy, jz
    cdef int step_x, step_y, step_z, okay, endpoint_inside, at_endpoint

    for ridx in range(n_rays):
        ex = endpoints[ridx, 0]
        ey = endpoints[ridx, 1]
        ez = endpoints[ridx, 2]
        dx = ex - ox
        dy = ey - oy
        dz = ez - oz
        seg = sqrt(dx * dx + dy * dy + dz * dz)
        if seg == 0.0:
            continue
        dx /= seg
        dy /= seg
        dz /= seg
        t0 = 0.0
        t1 = seg
        okay = 1
        if fabs(dx) < 1e-15:
            if ox < bx or ox > hx:
                okay = 0
        else:
            ta = (bx - ox) / dx
            tb = (hx - ox) / dx
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
        if okay and fabs(dy) < 1e-15:
            if oy < by or oy > hy:
                okay = 0
        elif okay:
            ta = (by - oy) / dy
            tb = (hy - oy) / dy
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
        if okay and fabs(dz) < 1e-15:
            if oz < bz or oz > hz:
                okay = 0
        elif okay:
            ta = (bz - oz) / dz
            tb = (hz - oz) / dz
            if ta > tb:
                ta, tb = tb, ta
            if ta > t0:
                t0 = ta
            if tb < t1:
                t1 = tb
        if not okay or t0 >= t1:
            continue
        endpoint_inside = 1 if (hit[ridx] and t1 >= seg - 1e-12) else 0
        t_start = t0 + 1e-9
        px = ox + dx * t_start
        py = oy + dy * t_start
        pz = oz + dz * t_start
        ix = <Py_ssize_t>((px - bx) / res)
        iy = <Py_ssize_t>((py - by) / res)
        iz = <Py_ssize_t>((pz - bz) / res)
        if ix < 0:
            ix = 0
        elif ix >= nx:
            ix = nx - 1
        if iy < 0:
            iy = 0
        elif iy >= ny:
            iy = ny - 1
        if iz < 0:
            iz = 0
        elif iz >= nz:
            iz = nz - 1
        if endpoint_inside:
            px = ox + dx * (seg - 1e-9)
            py = oy + dy * (seg - 1e-9)
            pz = oz + dz * (seg - 1e-9)
            jx = <Py_ssize_t>((px - bx) / res)
            jy = <Py_ssize_t>((py - by) / res)
            jz = <Py_ssize_t>((pz - bz) / res)
            if jx < 0:
                jx = 0
            elif jx >= nx:
                jx = nx - 1
            if jy < 0:
                jy = 0
            elif jy >= ny:
                jy = ny - 1
            if jz < 0:
                jz = 0
            elif jz >= nz:
                jz = nz - 1
        else:
            jx = jy = jz = -2
        step_x = 1 if dx > 0 else -1
        step_y = 1 if dy > 0 else -1
        step_z = 1 if dz > 0 else -1
        t_max_x = ((bx + (ix + (1 if step_x > 0 else 0)) * res) - ox) / dx if dx != 0 else INFINITY
        t_max_y = ((by + (iy + (1 if step_y > 0 else 0)) * res) - oy) / dy if dy != 0 else INFINITY
        t_max_z = ((bz + (iz + (1 if step_z > 0 else 0)) * res) - oz) / dz if dz != 0 else INFINITY
        t_dx = fabs(res / dx) if dx != 0 else INFINITY
        t_dy = fabs(res / dy) if dy != 0 else INFINITY
        t_dz = fabs(res / dz) if dz != 0 else INFINITY
        t_stop = t1 if t1 < seg else seg
        while True:
            at_endpoint = 1 if (ix == jx and iy == jy and iz == jz) else 0
            if at_endpoint:
                v = grid[ix, iy, iz] + l_occ
            else:
                v = grid[ix, iy, iz] + l_miss
            if v > l_max:
                v = l_max
            elif v < l_min:
                v = l_min
            grid[ix, iy, iz] = v
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


def first_nonfree_mask(cnp.int64_t[::1] sorted_pixels, cnp.uint8_t[::1] sorted_nonfree):
    """See graspnbv.kernels._py.first_nonfree_mask; identical contract."""
    cdef Py_ssize_t n = sorted_pixels.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] mv = out
    cdef Py_ssize_t i
    cdef cnp.int64_t current_pixel = 0
    cdef int blocked = 0
    for i in range(n):
        if i == 0 or sorted_pixels[i] != current_pixel:
            current_pixel = sorted_pixels[i]
            blocked = 0
        if not blocked:
            mv[i] = 1
            if sorted_nonfree[i]:
                blocked = 1
    return out.astype(bool)
