"""Contact-driven view utility and selection.

A view is worth taking when it looks head-on at planned grasp contacts from
the side the fingers will touch: per-contact observation quality is the angle
between the viewing direction and the contact normal (clamped to [pi/2, pi]),
a finger-normal switch zeroes contributions from the wrong side of the
surface, and the normalized contact weights trade off "more contacts" against
"much information about one contact".
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .camera import ViewCandidate

QUALITY_FLOOR = np.pi / 2.0


class ViewsExhaustedError(RuntimeError):
    """All candidate views have already been visited."""


class NoContactsError(ValueError):
    """Contact-driven selection needs at least one contact observation."""


@dataclass(frozen=True)
class Contact:
    """Planned finger-surface touch: normalized weight, position (m), unit normal."""

    weight: float
    position: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("contact weight must be non-negative")
        n = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "normal", n / np.linalg.norm(n))
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))


@dataclass(frozen=True)
class ContactObservation:
    """A contact plus the best observation quality achieved so far (init pi/2)."""

    contact: Contact
    best_quality: float = QUALITY_FLOOR


@dataclass(frozen=True)
class FingerLinkNormals:
    """Outward normals of the finger links at the final trajectory step."""

    normals: np.ndarray  # (R, 3), unit rows

    def __post_init__(self):
        n = np.atleast_2d(np.asarray(self.normals, dtype=float))
        if len(n) == 0:
            raise ValueError("a grasp must involve at least one finger link")
        object.__setattr__(self, "normals", n / np.linalg.norm(n, axis=1, keepdims=True))


def observation_quality(view: ViewCandidate, contact: Contact) -> float:
    """Angle between viewing direction and contact normal, clamped below at pi/2.

    pi means the view gazes head-on against the normal; any view of the back
    side scores the floor value pi/2.
    """
    dot = float(np.dot(view.view_direction, contact.normal))
    return float(np.arccos(np.clip(dot, -1.0, 0.0)))


def update_best_quality(obs: ContactObservation, visited: list[ViewCandidate]) -> ContactObservation:
    """Raise the stored best quality to the max over all visited views."""
    if not visited:
        return obs
    best = max(observation_quality(v, obs.contact) for v in visited)
    return replace(obs, best_quality=max(obs.best_quality, best))


def contact_view_value(
    view: ViewCandidate,
    fingers: FingerLinkNormals,
    obs: ContactObservation,
    improvement_only: bool = False,
) -> float:
    """Weighted value of an untried view for one contact.

    Each finger link contributes max(quality, best-so-far) gated by the
    side-of-surface switch (1 - sign(f . n)) / 2, with sign(0) := +1 so a
    grazing alignment contributes nothing. ``improvement_only`` swaps the
    per-link term for max(quality - best-so-far, 0), an ablation variant that
    only rewards views able to beat the best quality already achieved.
    """
    theta = observation_quality(view, obs.contact)
    dots = fingers.normals @ obs.contact.normal
    switch = np.where(dots < 0.0, 1.0, 0.0)
    term = max(theta - obs.best_quality, 0.0) if improvement_only else max(theta, obs.best_quality)
    return float(obs.contact.weight * term * switch.sum())


def view_utility(
    view: ViewCandidate,
    omega: list[ContactObservation],
    fingers: FingerLinkNormals,
    improvement_only: bool = False,
) -> float:
    """Total utility of a view: sum of per-contact values over all contacts."""
    if not omega:
        raise NoContactsError("view utility is undefined without contacts")
    return sum(contact_view_value(view, fingers, obs, improvement_only) for obs in omega)


def select_contact_view(
    candidates: list[ViewCandidate],
    visited: list[ViewCandidate],
    omega: list[ContactObservation],
    fingers: FingerLinkNormals,
    improvement_only: bool = False,
) -> ViewCandidate:
    """Unvisited candidate with maximum utility; ties break to the lowest index."""
    visited_ids = {v.index for v in visited}
    pool = [c for c in candidates if c.index not in visited_ids]
    if not pool:
        raise ViewsExhaustedError("no unvisited candidate views remain")
    pool.sort(key=lambda c: c.index)
    return max(pool, key=lambda c: (view_utility(c, omega, fingers, improvement_only), -c.index))


def utility_table(
    candidates: list[ViewCandidate],
    omega: list[ContactObservation],
    fingers: FingerLinkNormals,
) -> list[tuple[int, float]]:
    """(view index, utility) rows for CSV export / experiment logging."""
    return [(c.index, view_utility(c, omega, fingers)) for c in candidates]
