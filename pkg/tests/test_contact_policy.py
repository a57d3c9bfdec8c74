"""Contact-driven view utility: brute-force equivalence and analytic properties."""

import numpy as np
import pytest

from graspnbv.contact_policy import (
    QUALITY_FLOOR,
    Contact,
    ContactObservation,
    FingerLinkNormals,
    NoContactsError,
    ViewsExhaustedError,
    contact_view_value,
    observation_quality,
    select_contact_view,
    update_best_quality,
    view_utility,
)

from conftest import view_with_direction


def random_unit(rng, n=1):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def make_contact(rng, weight=None):
    return Contact(
        weight=float(rng.uniform(0.05, 1.0)) if weight is None else weight,
        position=rng.uniform(-0.1, 0.1, 3),
        normal=random_unit(rng)[0],
    )


class TestObservationQuality:
    def test_head_on_view_scores_pi(self):
        c = Contact(weight=1.0, position=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]))
        v = view_with_direction([0.0, 0.0, -1.0])
        assert np.isclose(observation_quality(v, c), np.pi)

    def test_back_side_views_hit_the_floor(self):
        c = Contact(weight=1.0, position=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]))
        v = view_with_direction([0.0, 0.0, 1.0])
        assert np.isclose(observation_quality(v, c), QUALITY_FLOOR)

    def test_range_is_upper_half_on_random_inputs(self):
        rng = np.random.default_rng(0)
        dirs = random_unit(rng, 100000)
        normals = random_unit(rng, 100000)
        dots = np.minimum(np.sum(dirs * normals, axis=1), 0.0)
        theta = np.arccos(dots)
        assert np.all(theta >= np.pi / 2.0 - 1e-12)
        assert np.all(theta <= np.pi + 1e-12)
        # spot-check the scalar function against the vectorized formula
        for i in range(0, 100000, 20000):
            v = view_with_direction(dirs[i])
            c = Contact(weight=1.0, position=np.zeros(3), normal=normals[i])
            assert np.isclose(observation_quality(v, c), theta[i])


class TestSwitch:
    def test_finger_normal_aligned_with_contact_contributes_nothing(self):
        rng = np.random.default_rng(1)
        n = 100000
        finger = random_unit(rng, n)
        contact_n = random_unit(rng, n)
        dots = np.sum(finger * contact_n, axis=1)
        # one finger per instance: positive or zero dot must zero the value
        for i in rng.integers(0, n, 200):
            c = Contact(weight=1.0, position=np.zeros(3), normal=contact_n[i])
            obs = ContactObservation(contact=c)
            fingers = FingerLinkNormals(finger[i][None, :])
            v = view_with_direction(-contact_n[i])
            value = contact_view_value(v, fingers, obs)
            if dots[i] >= 0:
                assert value == 0.0
            else:
                assert value > 0.0

    def test_sign_zero_counts_as_positive(self):
        c = Contact(weight=1.0, position=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]))
        obs = ContactObservation(contact=c)
        # finger normal exactly orthogonal to the contact normal
        fingers = FingerLinkNormals(np.array([[1.0, 0.0, 0.0]]))
        v = view_with_direction([0.0, 0.0, -1.0])
        assert contact_view_value(v, fingers, obs) == 0.0


class TestValueVariants:
    def setup_method(self):
        self.c = Contact(weight=0.5, position=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]))
        self.fingers = FingerLinkNormals(np.array([[0.0, 0.0, -1.0]]))

    def test_default_uses_max_of_theta_and_best(self):
        obs = ContactObservation(contact=self.c, best_quality=3.0)
        v = view_with_direction([0.0, 0.0, -1.0])  # theta = pi
        assert np.isclose(contact_view_value(v, self.fingers, obs), 0.5 * np.pi)
        v_side = view_with_direction([1.0, 0.0, 0.0])  # theta = pi/2 < best
        assert np.isclose(contact_view_value(v_side, self.fingers, obs), 0.5 * 3.0)

    def test_improvement_only_rewards_beating_best(self):
        obs = ContactObservation(contact=self.c, best_quality=3.0)
        v = view_with_direction([0.0, 0.0, -1.0])
        assert np.isclose(
            contact_view_value(v, self.fingers, obs, improvement_only=True), 0.5 * (np.pi - 3.0)
        )
        v_side = view_with_direction([1.0, 0.0, 0.0])
        assert contact_view_value(v_side, self.fingers, obs, improvement_only=True) == 0.0


def test_update_best_quality_takes_max_over_visited():
    c = Contact(weight=1.0, position=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]))
    obs = ContactObservation(contact=c)
    assert update_best_quality(obs, []).best_quality == QUALITY_FLOOR
    visited = [view_with_direction([0.0, 0.0, -1.0], 0), view_with_direction([1.0, 0.0, 0.0], 1)]
    assert np.isclose(update_best_quality(obs, visited).best_quality, np.pi)


def test_view_utility_requires_contacts():
    fingers = FingerLinkNormals(np.array([[0.0, 0.0, -1.0]]))
    with pytest.raises(NoContactsError):
        view_utility(view_with_direction([0.0, 0.0, -1.0]), [], fingers)


class TestSelectionBruteForce:
    def brute_force(self, candidates, visited, omega, fingers):
        visited_ids = {v.index for v in visited}
        best = None
        best_key = None
        for c in candidates:
            if c.index in visited_ids:
                continue
            u = sum(contact_view_value(c, fingers, obs) for obs in omega)
            key = (u, -c.index)  # ties break to the lowest index
            if best_key is None or key > best_key:
                best, best_key = c, key
        return best

    def test_matches_exhaustive_evaluation_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n_views = int(rng.integers(2, 41))
            n_contacts = int(rng.integers(1, 11))
            candidates = [view_with_direction(random_unit(rng)[0], i) for i in range(n_views)]
            n_visited = int(rng.integers(0, n_views))
            visited = list(rng.choice(candidates, size=n_visited, replace=False))
            omega = [
                ContactObservation(
                    contact=make_contact(rng), best_quality=float(rng.uniform(np.pi / 2, np.pi))
                )
                for _ in range(n_contacts)
            ]
            fingers = FingerLinkNormals(random_unit(rng, int(rng.integers(1, 4))))
            expected = self.brute_force(candidates, visited, omega, fingers)
            got = select_contact_view(candidates, visited, omega, fingers)
            assert got.index == expected.index

    def test_tie_break_prefers_lowest_index(self):
        # two identical views: equal utility, index 0 must win
        views = [view_with_direction([0.0, 0.0, -1.0], i) for i in range(2)]
        c = Contact(weight=1.0, position=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]))
        omega = [ContactObservation(contact=c)]
        fingers = FingerLinkNormals(np.array([[0.0, 0.0, -1.0]]))
        assert select_contact_view(views, [], omega, fingers).index == 0

    def test_exhausted_views_raise(self):
        views = [view_with_direction([0.0, 0.0, -1.0], 0)]
        c = Contact(weight=1.0, position=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]))
        omega = [ContactObservation(contact=c)]
        fingers = FingerLinkNormals(np.array([[0.0, 0.0, -1.0]]))
        with pytest.raises(ViewsExhaustedError):
            select_contact_view(views, views, omega, fingers)


def test_contact_weight_must_be_non_negative():
    with pytest.raises(ValueError):
        Contact(weight=-0.1, position=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]))
