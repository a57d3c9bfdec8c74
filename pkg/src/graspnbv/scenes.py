"""Builtin ground-truth scenes for experiments and tests.

All scenes share a desk-scale workspace centred on the origin with the table
plane at z = 0. Object sizes are typical of tabletop grasping work: cans,
mugs, brackets, thin-walled cups.
"""

from __future__ import annotations

import numpy as np

from .geometry import Pose
from .scene import Box, Cylinder, SceneModel, Shape, Tube

WORKSPACE_MIN = np.array([-0.35, -0.35, 0.0])
WORKSPACE_MAX = np.array([0.35, 0.35, 0.6])


def _scene(objects: list[Shape]) -> SceneModel:
    return SceneModel(
        objects=objects,
        workspace_min=WORKSPACE_MIN.copy(),
        workspace_max=WORKSPACE_MAX.copy(),
        table_height=0.0,
    )


def box_scene() -> SceneModel:
    """A single cracker-box-like cuboid standing on the table."""
    return _scene(
        [Box(size=np.array([0.06, 0.09, 0.16]), pose=Pose(translation=np.array([0.0, 0.0, 0.08])))]
    )


def can_scene() -> SceneModel:
    """A soup-can cylinder."""
    return _scene([Cylinder(radius=0.033, height=0.1)])


def mug_scene() -> SceneModel:
    """A mug: hollow body plus a handle slab on the -y side.

    From most viewpoints the handle hides behind the body, so finding it (or
    ruling out collisions near it) takes deliberately chosen views.
    """
    body = Tube(outer_radius=0.04, inner_radius=0.034, height=0.1, base_thickness=0.006)
    handle = Box(
        size=np.array([0.016, 0.03, 0.07]),
        pose=Pose(translation=np.array([0.0, -0.052, 0.05])),
    )
    return _scene([body, handle])


def bracket_scene() -> SceneModel:
    """An L-bracket: a flat base plate with an upright wall along one edge."""
    base = Box(size=np.array([0.12, 0.08, 0.012]), pose=Pose(translation=np.array([0.0, 0.0, 0.006])))
    wall = Box(size=np.array([0.012, 0.08, 0.09]), pose=Pose(translation=np.array([-0.054, 0.0, 0.057])))
    return _scene([base, wall])


def thin_cup_scene() -> SceneModel:
    """A thin-walled cup (4 mm wall): pinching the rim wall is a valid grasp."""
    return _scene([Tube(outer_radius=0.035, inner_radius=0.031, height=0.09, base_thickness=0.004)])


def plate_scene() -> SceneModel:
    """A dustpan-like plate: wide shallow slab with a raised lip at the back."""
    pan = Box(size=np.array([0.14, 0.1, 0.01]), pose=Pose(translation=np.array([0.0, 0.0, 0.005])))
    lip = Box(size=np.array([0.14, 0.012, 0.05]), pose=Pose(translation=np.array([0.0, 0.056, 0.025])))
    return _scene([pan, lip])


def clutter_scene() -> SceneModel:
    """Three objects close together; nearby obstacles constrain safe approaches."""
    can = Cylinder(radius=0.03, height=0.1, pose=Pose(translation=np.array([-0.02, 0.0, 0.0])))
    block = Box(size=np.array([0.05, 0.05, 0.07]), pose=Pose(translation=np.array([0.08, 0.03, 0.035])))
    slab = Box(size=np.array([0.04, 0.1, 0.14]), pose=Pose(translation=np.array([-0.02, 0.11, 0.07])))
    return _scene([can, block, slab])


def wall_scene(thickness: float = 0.004) -> SceneModel:
    """A free-standing upright wall seen from one side.

    With only front-face evidence the pinch generator must hypothesise a
    virtual back contact; the wall is thin enough that the hypothesis holds.
    """
    return _scene(
        [Box(size=np.array([thickness, 0.1, 0.12]), pose=Pose(translation=np.array([0.0, 0.0, 0.06])))]
    )


def thick_wall_scene(thickness: float = 0.06) -> SceneModel:
    """Like ``wall_scene`` but too thick for a hallucinated back contact to be real."""
    return wall_scene(thickness)


BUILTIN_SCENES = {
    "box": box_scene,
    "can": can_scene,
    "mug": mug_scene,
    "bracket": bracket_scene,
    "thin_cup": thin_cup_scene,
    "plate": plate_scene,
    "clutter": clutter_scene,
}


def get_scene(name: str) -> SceneModel:
    try:
        return BUILTIN_SCENES[name]()
    except KeyError:
        raise KeyError(f"unknown scene {name!r}; available: {sorted(BUILTIN_SCENES)}") from None
