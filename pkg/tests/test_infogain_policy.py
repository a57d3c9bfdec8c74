"""Information-gain view selection: utility bounds, back-side behavior, convergence."""

from math import log

import numpy as np
import pytest

from graspnbv.camera import CameraIntrinsics
from graspnbv.contact_policy import ViewsExhaustedError
from graspnbv.infogain_policy import gain_table, select_infogain_view, view_infogain_utility
from graspnbv.occupancy import OccupancyMap

from conftest import small_map, view_at

INTR = CameraIntrinsics.from_fov(160, 120, 60.0)


def cube_region(lo, hi):
    return {
        (a, b, c)
        for a in range(lo, hi)
        for b in range(lo, hi)
        for c in range(lo, hi)
    }


class TestUtility:
    def test_all_unknown_region_scores_the_single_voxel_gain(self):
        m = small_map(resolution=0.01)
        region = cube_region(8, 12)
        view = view_at([0.1, 0.1, 0.5], [0.1, 0.1, 0.1])
        u = view_infogain_utility(m, region, view, INTR)
        # every visible voxel is unknown at L = 0, so the average equals
        # the per-voxel gain there
        assert np.isclose(u, 0.0512, atol=1e-3)

    def test_saturated_region_scores_below_plateau(self):
        m = small_map(resolution=0.01)
        region = cube_region(8, 12)
        keys = np.array(sorted(region))
        m.grid[keys[:, 0], keys[:, 1], keys[:, 2]] = m.model.l_max
        view = view_at([0.1, 0.1, 0.5], [0.1, 0.1, 0.1])
        assert view_infogain_utility(m, region, view, INTR) < 1e-3

    def test_fully_free_region_scores_zero(self):
        m = small_map(resolution=0.01)
        region = cube_region(8, 12)
        keys = np.array(sorted(region))
        m.grid[keys[:, 0], keys[:, 1], keys[:, 2]] = m.model.l_min
        view = view_at([0.1, 0.1, 0.5], [0.1, 0.1, 0.1])
        assert view_infogain_utility(m, region, view, INTR) == 0.0

    def test_view_with_nothing_visible_scores_zero(self):
        m = small_map(resolution=0.01)
        region = cube_region(8, 12)
        # camera looking away from the region
        view = view_at([0.1, 0.1, 0.5], [0.1, 0.1, 5.0])
        assert view_infogain_utility(m, region, view, INTR) == 0.0

    def test_utility_bounded_by_ln2(self):
        m = small_map(resolution=0.01)
        region = cube_region(6, 14)
        rng = np.random.default_rng(0)
        keys = np.array(sorted(region))
        m.grid[keys[:, 0], keys[:, 1], keys[:, 2]] = rng.uniform(-2.0, 3.5, len(keys))
        for seed in range(5):
            eye = rng.uniform([-0.5, -0.5, 0.3], [0.5, 0.5, 0.8])
            u = view_infogain_utility(m, region, view_at(eye, [0.1, 0.1, 0.1]), INTR)
            assert 0.0 <= u <= log(2.0)


class TestSelection:
    def half_observed_map(self):
        """Cube region whose +x half is saturated, -x half untouched."""
        m = small_map(shape_m=(0.4, 0.4, 0.4), resolution=0.01)
        region = {
            (a, b, c) for a in range(16, 24) for b in range(16, 24) for c in range(16, 24)
        }
        keys = np.array(sorted(region))
        seen = keys[:, 0] >= 20
        m.grid[keys[seen, 0], keys[seen, 1], keys[seen, 2]] = m.model.l_max
        m.grid[keys[~seen, 0], keys[~seen, 1], keys[~seen, 2]] = 0.0
        return m, region

    def ring_views(self, center, radius=0.3, n=8):
        views = []
        for i in range(n):
            az = 2 * np.pi * i / n
            eye = center + radius * np.array([np.cos(az), np.sin(az), 0.5])
            views.append(view_at(eye, center, i))
        return views

    def test_selected_view_faces_the_unobserved_side(self):
        m, region = self.half_observed_map()
        center = np.array([0.2, 0.2, 0.2])
        views = self.ring_views(center)
        best = select_infogain_view(views, [], m, region, INTR)
        # the unknown half sits at -x: the chosen eye must be on the -x side
        assert best.position[0] < center[0]
        # and it must agree with the exhaustive utility table
        table = gain_table(views, m, region, INTR)
        top = max(table, key=lambda row: (row[1], -row[0]))
        assert best.index == top[0]

    def test_selection_skips_visited_views(self):
        m, region = self.half_observed_map()
        views = self.ring_views(np.array([0.2, 0.2, 0.2]))
        first = select_infogain_view(views, [], m, region, INTR)
        second = select_infogain_view(views, [first], m, region, INTR)
        assert second.index != first.index

    def test_all_views_visited_raises(self):
        m, region = self.half_observed_map()
        views = self.ring_views(np.array([0.2, 0.2, 0.2]))
        with pytest.raises(ViewsExhaustedError):
            select_infogain_view(views, views, m, region, INTR)


class TestConvergence:
    def test_repeated_observation_drives_utility_below_any_epsilon(self):
        """Simulated select -> observe cycles on a small static region."""
        m = small_map(shape_m=(0.3, 0.3, 0.3), resolution=0.02)
        region = {(a, b, c) for a in range(5, 10) for b in range(5, 10) for c in range(5, 10)}
        center = np.array([0.15, 0.15, 0.15])
        views = []
        for i in range(34):
            az = 2 * np.pi * i / 34.0
            el = 0.3 + 0.4 * (i % 5) / 5.0
            eye = center + 0.5 * np.array(
                [np.cos(az) * np.cos(el), np.sin(az) * np.cos(el), np.sin(el)]
            )
            views.append(view_at(eye, center, i))
        keys = np.array(sorted(region))
        visited = []
        max_u = np.inf
        for _ in range(34):
            best = select_infogain_view(views, visited, m, region, INTR)
            visited.append(best)
            # observing the region: every voxel in view converges toward free
            from graspnbv.camera import Frustum

            frustum = Frustum(pose=best.pose, intrinsics=INTR)
            mask = m.visible_mask(keys, frustum)
            seen = keys[mask]
            m.grid[seen[:, 0], seen[:, 1], seen[:, 2]] += 3 * m.model.l_miss
            np.clip(m.grid, m.model.l_min, m.model.l_max, out=m.grid)
            max_u = max(
                view_infogain_utility(m, region, v, INTR)
                for v in views
                if v.index not in {x.index for x in visited}
            )
            if max_u < 1e-3:
                break
        assert max_u < 1e-3
