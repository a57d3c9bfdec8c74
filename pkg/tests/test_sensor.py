"""Depth capture, back projection, segmentation and integration."""

import numpy as np

from graspnbv.camera import NO_RETURN
from graspnbv.pointcloud import PointCloud
from graspnbv.scene import SceneModel
from graspnbv.scenes import get_scene
from graspnbv.sensor import (
    NoiseParams,
    back_project,
    capture,
    integrate,
    ray_endpoints,
    segment,
)

from conftest import view_at


def empty_scene():
    return SceneModel(
        objects=[],
        workspace_min=np.array([-0.35, -0.35, 0.0]),
        workspace_max=np.array([0.35, 0.35, 0.6]),
        table_height=0.0,
    )


def top_view(height=0.5):
    return view_at([0.0, 0.0, height], [0.0, 0.0, 0.0])


def test_capture_empty_scene_without_table_range():
    # camera looking up from high above: nothing in [near, far] along any ray
    view = view_at([0.0, 0.0, 3.0], [0.0, 0.0, 10.0])
    depth = capture(empty_scene(), view, NoiseParams.off())
    assert np.all(depth.depths == NO_RETURN)


def test_capture_center_pixel_range_matches_geometry(intrinsics):
    view = top_view(0.5)
    depth = capture(get_scene("box"), view, NoiseParams.off(), intrinsics)
    # box top face at z = 0.16, straight below the camera
    center = depth.depths[intrinsics.height // 2, intrinsics.width // 2]
    assert np.isclose(center, 0.5 - 0.16, atol=1e-3)


def test_capture_noise_is_seeded_and_angle_dependent(intrinsics):
    view = top_view(0.5)
    scene = get_scene("box")
    d1 = capture(scene, view, NoiseParams(0.001, 0.002), intrinsics, rng=np.random.default_rng(7))
    d2 = capture(scene, view, NoiseParams(0.001, 0.002), intrinsics, rng=np.random.default_rng(7))
    d3 = capture(scene, view, NoiseParams(0.001, 0.002), intrinsics, rng=np.random.default_rng(8))
    assert np.array_equal(d1.depths, d2.depths)
    assert not np.array_equal(d1.depths, d3.depths)


def test_back_project_inverts_capture(intrinsics):
    view = top_view(0.5)
    depth = capture(get_scene("box"), view, NoiseParams.off(), intrinsics)
    pts, hit = back_project(depth, view)
    # every hit on the box's top face reprojects to z = 0.16
    top = hit & (np.abs(pts[:, 0]) < 0.02) & (np.abs(pts[:, 1]) < 0.03)
    assert np.any(top)
    assert np.allclose(pts[top, 2], 0.16, atol=1e-6)


def test_ray_endpoints_use_far_plane_for_misses(intrinsics):
    view = view_at([0.0, 0.0, 3.0], [0.0, 0.0, 10.0])
    depth = capture(empty_scene(), view, NoiseParams.off(), intrinsics)
    endpoints, hit = ray_endpoints(depth, view, far=2.0)
    assert not hit.any()
    dist = np.linalg.norm(endpoints - view.position, axis=1)
    assert np.allclose(dist, 2.0, atol=1e-9)


class TestSegment:
    def seg(self, scene_name="box", noise=None, view=None):
        scene = get_scene(scene_name)
        view = view or view_at([0.35, 0.0, 0.4], [0.0, 0.0, 0.05])
        rng = np.random.default_rng(0)
        depth = capture(scene, view, noise or NoiseParams.off(), rng=rng)
        return segment(
            depth,
            view,
            workspace_min=scene.workspace_min,
            workspace_max=scene.workspace_max,
        )

    def test_table_points_are_stripped(self):
        cloud = self.seg()
        assert not cloud.is_empty
        assert np.all(cloud.points[:, 2] > 0.005)

    def test_points_lie_on_the_object(self):
        scene = get_scene("box")
        cloud = self.seg()
        d, _ = scene.surface_query(cloud.points)
        assert np.quantile(d, 0.95) < 0.002

    def test_normals_are_unit_and_camera_facing(self):
        view = view_at([0.35, 0.0, 0.4], [0.0, 0.0, 0.05])
        cloud = self.seg(view=view)
        assert np.allclose(np.linalg.norm(cloud.normals, axis=1), 1.0)
        to_cam = view.position - cloud.points
        dots = np.sum(cloud.normals * to_cam, axis=1)
        assert np.all(dots >= -1e-9)

    def test_normals_match_ground_truth_under_noise(self):
        scene = get_scene("box")
        cloud = self.seg(noise=NoiseParams(0.001, 0.002))
        _, true_n = scene.surface_query(cloud.points)
        cos = np.abs(np.sum(cloud.normals * true_n, axis=1))
        angles = np.degrees(np.arccos(np.clip(cos, 0.0, 1.0)))
        assert np.quantile(angles, 0.9) < 20.0

    def test_noisy_table_outliers_are_removed(self):
        cloud = self.seg(noise=NoiseParams(0.001, 0.002))
        # without the outlier filter the bounding box blows up to table scale
        span = cloud.points.max(axis=0) - cloud.points.min(axis=0)
        assert np.all(span[:2] < 0.2)


def test_integrate_deduplicates():
    a = PointCloud(np.array([[0.0, 0.0, 0.1]]), np.array([[0.0, 0.0, 1.0]]))
    b = PointCloud(np.array([[0.001, 0.0, 0.1], [0.1, 0.0, 0.1]]), np.tile([0.0, 0.0, 1.0], (2, 1)))
    out = integrate(a, b, resolution=0.005)
    assert len(out) == 2
