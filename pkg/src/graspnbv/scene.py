"""Ground-truth scene geometry: analytic primitives, triangle meshes, ray casting.

Every shape supports three queries used across the simulator:

* ``raycast`` -- nearest ray-surface intersection (range + outward normal),
* ``contains`` -- solid containment test,
* ``surface_query`` -- distance to the surface and the normal at the closest
  surface point (used by the ground-truth grasp oracle).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .geometry import Pose

_EPS = 1e-12


class Shape:
    """Base class for scene solids. Shapes are posed rigid solids."""

    pose: Pose

    def raycast(self, origins: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Nearest hit distance along each ray (inf = miss) and outward world normals."""
        raise NotImplementedError

    def contains(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def surface_query(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Distance from each point to the shape surface and the outward normal there."""
        raise NotImplementedError

    def _to_local(self, origins, dirs=None):
        inv = self.pose.inverse()
        o = inv.apply(origins)
        if dirs is None:
            return o
        return o, inv.rotate(dirs)


def _finish_raycast(pose: Pose, t: np.ndarray, n_local: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = pose.rotate(n_local)
    return t, n


@dataclass
class Box(Shape):
    """Axis-aligned box in its local frame, centred on the pose origin."""

    size: np.ndarray
    pose: Pose = field(default_factory=Pose)

    def __post_init__(self):
        self.size = np.asarray(self.size, dtype=float)

    def raycast(self, origins, dirs):
        o, d = self._to_local(np.atleast_2d(origins), np.atleast_2d(dirs))
        h = self.size / 2.0
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_d = 1.0 / d
        t1 = (-h - o) * inv_d
        t2 = (h - o) * inv_d
        tmin_axis = np.minimum(t1, t2)
        tmax_axis = np.maximum(t1, t2)
        # Parallel rays: hit only if origin is inside the slab.
        par = np.abs(d) < _EPS
        inside_slab = np.abs(o) <= h
        tmin_axis = np.where(par, np.where(inside_slab, -np.inf, np.inf), tmin_axis)
        tmax_axis = np.where(par, np.where(inside_slab, np.inf, -np.inf), tmax_axis)
        tmin = tmin_axis.max(axis=1)
        tmax = tmax_axis.min(axis=1)
        hit = (tmax >= tmin) & (tmax > 0)
        t = np.where(tmin > 0, tmin, tmax)  # rays starting inside exit through tmax
        t = np.where(hit, t, np.inf)
        entry_axis = np.argmax(tmin_axis, axis=1)
        n = np.zeros_like(o)
        rows = np.arange(len(o))
        sign = -np.sign(d[rows, entry_axis])
        sign[sign == 0] = 1.0
        n[rows, entry_axis] = sign
        n[~np.isfinite(t)] = 0.0
        return _finish_raycast(self.pose, t, n)

    def contains(self, points):
        p = np.abs(self._to_local(np.atleast_2d(points)))
        return np.all(p <= self.size / 2.0 + _EPS, axis=1)

    def surface_query(self, points):
        p = self._to_local(np.atleast_2d(points))
        h = self.size / 2.0
        q = np.abs(p) - h
        outside = np.maximum(q, 0.0)
        d_out = np.linalg.norm(outside, axis=1)
        d_in = np.max(q, axis=1)  # negative inside
        dist = np.where(d_in > 0, d_out, -d_in)
        n = np.zeros_like(p)
        is_out = d_in > 0
        # outside: direction from the clamped surface point
        closest = np.clip(p, -h, h)
        dv = p - closest
        nv = np.linalg.norm(dv, axis=1, keepdims=True)
        n_out = np.divide(dv, nv, out=np.zeros_like(dv), where=nv > _EPS)
        # inside (or on surface): normal of the nearest face
        ax = np.argmax(q, axis=1)
        rows = np.arange(len(p))
        n_in = np.zeros_like(p)
        s = np.sign(p[rows, ax])
        s[s == 0] = 1.0
        n_in[rows, ax] = s
        n = np.where(is_out[:, None] & (nv > _EPS), n_out, n_in)
        return dist, self.pose.rotate(n)


@dataclass
class Sphere(Shape):
    radius: float
    pose: Pose = field(default_factory=Pose)

    def raycast(self, origins, dirs):
        o, d = self._to_local(np.atleast_2d(origins), np.atleast_2d(dirs))
        b = np.sum(o * d, axis=1)
        c = np.sum(o * o, axis=1) - self.radius**2
        disc = b * b - c
        t = np.full(len(o), np.inf)
        ok = disc >= 0
        sq = np.sqrt(np.where(ok, disc, 0.0))
        t0 = -b - sq
        t1 = -b + sq
        t_hit = np.where(t0 > _EPS, t0, np.where(t1 > _EPS, t1, np.inf))
        t[ok] = t_hit[ok]
        pt = o + t[:, None] * d
        n = np.divide(pt, np.linalg.norm(pt, axis=1, keepdims=True), out=np.zeros_like(pt), where=np.isfinite(t)[:, None])
        return _finish_raycast(self.pose, t, n)

    def contains(self, points):
        p = self._to_local(np.atleast_2d(points))
        return np.linalg.norm(p, axis=1) <= self.radius + _EPS

    def surface_query(self, points):
        p = self._to_local(np.atleast_2d(points))
        r = np.linalg.norm(p, axis=1)
        n = np.divide(p, r[:, None], out=np.tile(np.array([0.0, 0.0, 1.0]), (len(p), 1)), where=r[:, None] > _EPS)
        return np.abs(r - self.radius), self.pose.rotate(n)


def _quadratic_side_hits(o, d, radius):
    """Intersections with the infinite cylinder x^2+y^2=r^2; returns (t0, t1, valid)."""
    a = d[:, 0] ** 2 + d[:, 1] ** 2
    b = o[:, 0] * d[:, 0] + o[:, 1] * d[:, 1]
    c = o[:, 0] ** 2 + o[:, 1] ** 2 - radius**2
    disc = b * b - a * c
    ok = (disc >= 0) & (a > _EPS)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = (-b - sq) / a
        t1 = (-b + sq) / a
    return t0, t1, ok


@dataclass
class Cylinder(Shape):
    """Solid capped cylinder; local +z axis, base at z = 0, top at z = height."""

    radius: float
    height: float
    pose: Pose = field(default_factory=Pose)

    def raycast(self, origins, dirs):
        o, d = self._to_local(np.atleast_2d(origins), np.atleast_2d(dirs))
        n_rays = len(o)
        best_t = np.full(n_rays, np.inf)
        best_n = np.zeros((n_rays, 3))

        def consider(t, normal_fn, cond):
            nonlocal best_t, best_n
            upd = cond & (t > _EPS) & (t < best_t)
            if np.any(upd):
                best_t = np.where(upd, t, best_t)
                best_n[upd] = normal_fn(upd)

        t0, t1, ok = _quadratic_side_hits(o, d, self.radius)
        for t_side in (t0, t1):
            with np.errstate(invalid="ignore"):
                z = o[:, 2] + t_side * d[:, 2]
            cond = ok & (z >= 0) & (z <= self.height)

            def n_side(mask, t_side=t_side):
                pt = o[mask] + t_side[mask, None] * d[mask]
                nv = np.concatenate([pt[:, :2], np.zeros((mask.sum(), 1))], axis=1)
                return nv / np.linalg.norm(nv, axis=1, keepdims=True)

            consider(t_side, n_side, cond)
        for z_cap, nz in ((0.0, -1.0), (self.height, 1.0)):
            with np.errstate(divide="ignore", invalid="ignore"):
                t_cap = (z_cap - o[:, 2]) / d[:, 2]
                xy = o[:, :2] + t_cap[:, None] * d[:, :2]
                cond = (np.abs(d[:, 2]) > _EPS) & (np.sum(xy * xy, axis=1) <= self.radius**2)
            consider(t_cap, lambda mask, nz=nz: np.tile([0.0, 0.0, nz], (mask.sum(), 1)), cond)
        return _finish_raycast(self.pose, best_t, best_n)

    def contains(self, points):
        p = self._to_local(np.atleast_2d(points))
        r2 = p[:, 0] ** 2 + p[:, 1] ** 2
        return (r2 <= self.radius**2 + _EPS) & (p[:, 2] >= -_EPS) & (p[:, 2] <= self.height + _EPS)

    def surface_query(self, points):
        p = self._to_local(np.atleast_2d(points))
        r = np.sqrt(p[:, 0] ** 2 + p[:, 1] ** 2)
        dr = r - self.radius
        dz = np.maximum(-p[:, 2], p[:, 2] - self.height)
        # 2D box distance in (radial, axial) coordinates
        q = np.stack([dr, dz], axis=1)
        outside = np.maximum(q, 0.0)
        d_out = np.linalg.norm(outside, axis=1)
        d_in = np.max(q, axis=1)
        dist = np.where(d_in > 0, d_out, -d_in)
        radial = np.divide(p[:, :2], r[:, None], out=np.zeros((len(p), 2)), where=r[:, None] > _EPS)
        n = np.zeros_like(p)
        side_closer = dr > dz
        n[side_closer, :2] = radial[side_closer]
        zsign = np.where(p[:, 2] > self.height / 2.0, 1.0, -1.0)
        n[~side_closer, 2] = zsign[~side_closer]
        # points outside the corner region: blend like the box case
        corner = (q[:, 0] > 0) & (q[:, 1] > 0)
        if np.any(corner):
            nv = np.concatenate([radial[corner] * q[corner, 0:1], (zsign[corner] * q[corner, 1])[:, None]], axis=1)
            n[corner] = nv / np.linalg.norm(nv, axis=1, keepdims=True)
        return np.abs(dist), self.pose.rotate(n)


@dataclass
class Tube(Shape):
    """Open-top hollow cylinder with a solid bottom (cup/mug body archetype).

    Local +z axis, base at z = 0. Solid region: outer cylinder of ``outer_radius``
    and ``height`` minus the inner void of ``inner_radius`` above ``base_thickness``.
    """

    outer_radius: float
    inner_radius: float
    height: float
    base_thickness: float = 0.005
    pose: Pose = field(default_factory=Pose)

    def __post_init__(self):
        if not 0 < self.inner_radius < self.outer_radius:
            raise ValueError("tube requires 0 < inner_radius < outer_radius")

    def raycast(self, origins, dirs):
        o, d = self._to_local(np.atleast_2d(origins), np.atleast_2d(dirs))
        n_rays = len(o)
        best_t = np.full(n_rays, np.inf)
        best_n = np.zeros((n_rays, 3))

        def consider(t, cond, normals):
            nonlocal best_t, best_n
            upd = cond & (t > _EPS) & (t < best_t)
            if np.any(upd):
                best_t = np.where(upd, t, best_t)
                best_n[upd] = normals[upd]

        def radial_normals(t, sign):
            with np.errstate(invalid="ignore"):
                pt = o + t[:, None] * d
            nv = np.concatenate([pt[:, :2], np.zeros((n_rays, 1))], axis=1)
            norms = np.linalg.norm(nv, axis=1, keepdims=True)
            return sign * np.divide(nv, norms, out=np.zeros_like(nv), where=norms > _EPS)

        # outer side r = outer_radius, z in [0, h]
        t0, t1, ok = _quadratic_side_hits(o, d, self.outer_radius)
        for t_s in (t0, t1):
            with np.errstate(invalid="ignore"):
                z = o[:, 2] + t_s * d[:, 2]
            consider(t_s, ok & (z >= 0) & (z <= self.height), radial_normals(t_s, +1.0))
        # inner side r = inner_radius, z in [base_thickness, h]; normal points toward axis
        t0, t1, ok = _quadratic_side_hits(o, d, self.inner_radius)
        for t_s in (t0, t1):
            with np.errstate(invalid="ignore"):
                z = o[:, 2] + t_s * d[:, 2]
            consider(t_s, ok & (z >= self.base_thickness) & (z <= self.height), radial_normals(t_s, -1.0))
        # planar surfaces: (z, r_lo, r_hi, normal z sign)
        planes = [
            (0.0, 0.0, self.outer_radius, -1.0),  # bottom
            (self.height, self.inner_radius, self.outer_radius, 1.0),  # rim
            (self.base_thickness, 0.0, self.inner_radius, 1.0),  # inner floor
        ]
        for z_cap, r_lo, r_hi, nz in planes:
            with np.errstate(divide="ignore", invalid="ignore"):
                t_cap = (z_cap - o[:, 2]) / d[:, 2]
                xy = o[:, :2] + t_cap[:, None] * d[:, :2]
                r2 = np.sum(xy * xy, axis=1)
            cond = (np.abs(d[:, 2]) > _EPS) & (r2 >= r_lo**2 - _EPS) & (r2 <= r_hi**2 + _EPS)
            consider(t_cap, cond, np.tile([0.0, 0.0, nz], (n_rays, 1)))
        return _finish_raycast(self.pose, best_t, best_n)

    def contains(self, points):
        p = self._to_local(np.atleast_2d(points))
        r2 = p[:, 0] ** 2 + p[:, 1] ** 2
        in_outer = (r2 <= self.outer_radius**2 + _EPS) & (p[:, 2] >= -_EPS) & (p[:, 2] <= self.height + _EPS)
        in_void = (r2 < self.inner_radius**2 - _EPS) & (p[:, 2] > self.base_thickness + _EPS)
        return in_outer & ~in_void

    def surface_query(self, points):
        p = self._to_local(np.atleast_2d(points))
        r = np.sqrt(p[:, 0] ** 2 + p[:, 1] ** 2)
        z = p[:, 2]
        radial = np.divide(p[:, :2], r[:, None], out=np.zeros((len(p), 2)), where=r[:, None] > _EPS)
        candidates = []

        def add(dist, normal):
            candidates.append((dist, normal))

        def rad3(sign):
            return np.concatenate([sign * radial, np.zeros((len(p), 1))], axis=1)

        # outer wall
        dz_out = np.maximum(np.maximum(-z, z - self.height), 0.0)
        add(np.hypot(np.abs(r - self.outer_radius), dz_out), rad3(+1.0))
        # inner wall (only meaningful for z >= base)
        dz_in = np.maximum(np.maximum(self.base_thickness - z, z - self.height), 0.0)
        add(np.hypot(np.abs(r - self.inner_radius), dz_in), rad3(-1.0))
        # bottom plane
        dr_btm = np.maximum(r - self.outer_radius, 0.0)
        add(np.hypot(np.abs(z), dr_btm), np.tile([0.0, 0.0, -1.0], (len(p), 1)))
        # rim annulus at z = h
        dr_rim = np.maximum(np.maximum(self.inner_radius - r, r - self.outer_radius), 0.0)
        add(np.hypot(np.abs(z - self.height), dr_rim), np.tile([0.0, 0.0, 1.0], (len(p), 1)))
        # inner floor disk at z = base_thickness
        dr_floor = np.maximum(r - self.inner_radius, 0.0)
        add(np.hypot(np.abs(z - self.base_thickness), dr_floor), np.tile([0.0, 0.0, 1.0], (len(p), 1)))

        dists = np.stack([c[0] for c in candidates], axis=1)
        normals = np.stack([c[1] for c in candidates], axis=1)
        best = np.argmin(dists, axis=1)
        rows = np.arange(len(p))
        return dists[rows, best], self.pose.rotate(normals[rows, best])


@dataclass
class Mesh(Shape):
    """Triangle soup; ASCII STL / OBJ loadable. Containment by ray-parity."""

    vertices: np.ndarray  # (V, 3)
    faces: np.ndarray  # (F, 3) int
    pose: Pose = field(default_factory=Pose)

    def _tris(self):
        v = self.vertices
        f = self.faces
        return v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]

    def raycast(self, origins, dirs):
        o, d = self._to_local(np.atleast_2d(origins), np.atleast_2d(dirs))
        a, b, c = self._tris()
        e1 = b - a
        e2 = c - a
        best_t = np.full(len(o), np.inf)
        best_n = np.zeros((len(o), 3))
        # loop over triangles, vectorized over rays (meshes are small here)
        for i in range(len(a)):
            p = np.cross(d, e2[i])
            det = p @ e1[i]
            ok = np.abs(det) > _EPS
            with np.errstate(divide="ignore", invalid="ignore"):
                inv = 1.0 / det
                s = o - a[i]
                u = np.sum(s * p, axis=1) * inv
                q = np.cross(s, e1[i])
                v = np.sum(d * q, axis=1) * inv
                t = (q @ e2[i]) * inv
            hit = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > _EPS) & (t < best_t)
            if np.any(hit):
                best_t[hit] = t[hit]
                n = np.cross(e1[i], e2[i])
                n = n / np.linalg.norm(n)
                # orient against the ray
                sgn = np.where(np.sum(d[hit] * n, axis=1) > 0, -1.0, 1.0)
                best_n[hit] = sgn[:, None] * n
        return _finish_raycast(self.pose, best_t, best_n)

    def contains(self, points):
        pts = np.atleast_2d(points)
        dirs = np.tile([1.0, 0.0, 0.0], (len(pts), 1))
        # count crossings along +x in the local frame
        o = self._to_local(pts)
        a, b, c = self._tris()
        e1 = b - a
        e2 = c - a
        counts = np.zeros(len(o), dtype=int)
        d = dirs
        for i in range(len(a)):
            p = np.cross(d, e2[i])
            det = p @ e1[i]
            ok = np.abs(det) > _EPS
            with np.errstate(divide="ignore", invalid="ignore"):
                inv = 1.0 / det
                s = o - a[i]
                u = np.sum(s * p, axis=1) * inv
                q = np.cross(s, e1[i])
                v = np.sum(d * q, axis=1) * inv
                t = (q @ e2[i]) * inv
            counts += (ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > _EPS)).astype(int)
        return counts % 2 == 1

    def surface_query(self, points):
        p = self._to_local(np.atleast_2d(points))
        a, b, c = self._tris()
        best_d = np.full(len(p), np.inf)
        best_n = np.zeros((len(p), 3))
        for i in range(len(a)):
            d, _ = _point_triangle_distance(p, a[i], b[i], c[i])
            n = np.cross(b[i] - a[i], c[i] - a[i])
            n = n / (np.linalg.norm(n) + _EPS)
            upd = d < best_d
            best_d[upd] = d[upd]
            best_n[upd] = n
        return best_d, self.pose.rotate(best_n)


def _point_triangle_distance(p, a, b, c):
    """Distance from points p (N,3) to triangle abc; returns (dist, closest)."""
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = ap @ ab
    d2 = ap @ ac
    bp = p - b
    d3 = bp @ ab
    d4 = bp @ ac
    cp = p - c
    d5 = cp @ ab
    d6 = cp @ ac
    closest = np.zeros_like(p)
    done = np.zeros(len(p), dtype=bool)

    def assign(mask, value):
        nonlocal done
        m = mask & ~done
        closest[m] = value if value.ndim == 1 else value[m]
        done |= m

    assign((d1 <= 0) & (d2 <= 0), a)
    assign((d3 >= 0) & (d4 <= d3), b)
    assign((d6 >= 0) & (d5 <= d6), c)
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = np.where(np.abs(d1 - d3) > 0, d1 / (d1 - d3), 0.0)
    assign((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + np.outer(v_ab, ab))
    vb = d5 * d2 - d1 * d6
    with np.errstate(divide="ignore", invalid="ignore"):
        w_ac = np.where(np.abs(d2 - d6) > 0, d2 / (d2 - d6), 0.0)
    assign((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + np.outer(w_ac, ac))
    va = d3 * d6 - d5 * d4
    denom = (d4 - d3) + (d5 - d6)
    with np.errstate(divide="ignore", invalid="ignore"):
        w_bc = np.where(np.abs(denom) > 0, (d4 - d3) / denom, 0.0)
    assign((va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0), b + np.outer(w_bc, c - b))
    # interior
    denom_i = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(denom_i != 0, vb / denom_i, 0.0)
        w = np.where(denom_i != 0, vc / denom_i, 0.0)
    interior = a + np.outer(v, ab) + np.outer(w, ac)
    closest[~done] = interior[~done]
    return np.linalg.norm(p - closest, axis=1), closest


@dataclass
class SceneModel:
    """Ground-truth scene: posed solids on a table inside an axis-aligned workspace."""

    objects: list[Shape]
    workspace_min: np.ndarray
    workspace_max: np.ndarray
    table_height: float = 0.0

    def __post_init__(self):
        self.workspace_min = np.asarray(self.workspace_min, dtype=float)
        self.workspace_max = np.asarray(self.workspace_max, dtype=float)
        ext = (self.workspace_max - self.workspace_min)[:2] * 1.5
        ctr = (self.workspace_max + self.workspace_min) / 2.0
        self._table = Box(
            size=np.array([ext[0], ext[1], 0.02]),
            pose=Pose(translation=np.array([ctr[0], ctr[1], self.table_height - 0.01])),
        )

    @property
    def centroid(self) -> np.ndarray:
        return (self.workspace_min + self.workspace_max) / 2.0

    def raycast(self, origins: np.ndarray, dirs: np.ndarray, include_table: bool = True):
        """Nearest hit over all scene solids (and the table unless excluded)."""
        origins = np.atleast_2d(origins)
        dirs = np.atleast_2d(dirs)
        shapes = list(self.objects) + ([self._table] if include_table else [])
        best_t = np.full(len(origins), np.inf)
        best_n = np.zeros((len(origins), 3))
        for shape in shapes:
            t, n = shape.raycast(origins, dirs)
            upd = t < best_t
            best_t[upd] = t[upd]
            best_n[upd] = n[upd]
        return best_t, best_n

    def contains(self, points: np.ndarray, include_table: bool = True) -> np.ndarray:
        points = np.atleast_2d(points)
        mask = np.zeros(len(points), dtype=bool)
        for shape in self.objects:
            mask |= shape.contains(points)
        if include_table:
            mask |= self._table.contains(points)
        return mask

    def surface_query(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Closest object-surface distance and normal (table excluded)."""
        points = np.atleast_2d(points)
        best_d = np.full(len(points), np.inf)
        best_n = np.zeros((len(points), 3))
        for shape in self.objects:
            d, n = shape.surface_query(points)
            upd = d < best_d
            best_d[upd] = d[upd]
            best_n[upd] = n[upd]
        return best_d, best_n


# ---------------------------------------------------------------------------
# scene / mesh file IO
# ---------------------------------------------------------------------------

def _pose_from_dict(d: dict | None) -> Pose:
    if not d:
        return Pose()
    t = np.asarray(d.get("translation", [0.0, 0.0, 0.0]), dtype=float)
    if "rotation" in d:
        q = np.asarray(d["rotation"], dtype=float)
        q = q / np.linalg.norm(q)
    else:
        q = np.array([1.0, 0.0, 0.0, 0.0])
    return Pose(q, t)


def _pose_to_dict(p: Pose) -> dict:
    return {"translation": [float(x) for x in p.translation], "rotation": [float(x) for x in p.rotation]}


def _shape_from_dict(d: dict, base_dir: str = ".") -> Shape:
    kind = d["type"]
    pose = _pose_from_dict(d.get("pose"))
    if kind == "box":
        return Box(size=np.asarray(d["size"], dtype=float), pose=pose)
    if kind == "sphere":
        return Sphere(radius=float(d["radius"]), pose=pose)
    if kind == "cylinder":
        return Cylinder(radius=float(d["radius"]), height=float(d["height"]), pose=pose)
    if kind == "tube":
        return Tube(
            outer_radius=float(d["outer_radius"]),
            inner_radius=float(d["inner_radius"]),
            height=float(d["height"]),
            base_thickness=float(d.get("base_thickness", 0.005)),
            pose=pose,
        )
    if kind == "mesh":
        v, f = load_mesh(os.path.join(base_dir, d["path"]))
        return Mesh(vertices=v, faces=f, pose=pose)
    raise ValueError(f"unknown shape type {kind!r}")


def _shape_to_dict(s: Shape) -> dict:
    d: dict = {"pose": _pose_to_dict(s.pose)}
    if isinstance(s, Box):
        d.update(type="box", size=[float(x) for x in s.size])
    elif isinstance(s, Sphere):
        d.update(type="sphere", radius=s.radius)
    elif isinstance(s, Cylinder):
        d.update(type="cylinder", radius=s.radius, height=s.height)
    elif isinstance(s, Tube):
        d.update(
            type="tube",
            outer_radius=s.outer_radius,
            inner_radius=s.inner_radius,
            height=s.height,
            base_thickness=s.base_thickness,
        )
    else:
        raise ValueError(f"cannot serialize shape {type(s).__name__}")
    return d


def load_scene(path: str) -> SceneModel:
    """Load a scene description (YAML key/value + arrays)."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    base_dir = os.path.dirname(os.path.abspath(path))
    return SceneModel(
        objects=[_shape_from_dict(d, base_dir) for d in data.get("objects", [])],
        workspace_min=np.asarray(data["workspace"]["min"], dtype=float),
        workspace_max=np.asarray(data["workspace"]["max"], dtype=float),
        table_height=float(data.get("table_height", 0.0)),
    )


def save_scene(scene: SceneModel, path: str) -> None:
    data = {
        "table_height": scene.table_height,
        "workspace": {
            "min": [float(x) for x in scene.workspace_min],
            "max": [float(x) for x in scene.workspace_max],
        },
        "objects": [_shape_to_dict(s) for s in scene.objects],
    }
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)


def load_mesh(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Load an ASCII STL or OBJ (triangles only) as (vertices, faces)."""
    if path.lower().endswith(".stl"):
        return _load_ascii_stl(path)
    if path.lower().endswith(".obj"):
        return _load_obj(path)
    raise ValueError(f"unsupported mesh format: {path}")


def _load_ascii_stl(path):
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path) as fh:
        current: list[int] = []
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "vertex":
                current.append(len(verts))
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "endfacet":
                if len(current) != 3:
                    raise ValueError("STL facet is not a triangle")
                faces.append(current)
                current = []
    return np.asarray(verts, dtype=float), np.asarray(faces, dtype=int)


def _load_obj(path):
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                if len(idx) != 3:
                    raise ValueError("OBJ faces must be triangles")
                faces.append(idx)
    return np.asarray(verts, dtype=float), np.asarray(faces, dtype=int)
