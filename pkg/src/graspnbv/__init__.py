"""Task-driven next-best-view selection for grasping, in a desk-scale simulator."""

from .camera import CameraIntrinsics, DepthImage, Frustum, ViewCandidate, generate_view_sphere
from .config import Config
from .contact_policy import Contact, ContactObservation, FingerLinkNormals
from .geometry import Pose, look_at
from .grasp import (
    GraspHypothesis,
    GraspOutcome,
    GraspParams,
    OracleParams,
    find_grasp,
    ground_truth_grasp_oracle,
)
from .kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .occupancy import InverseSensorModel, OccupancyMap, information_gain
from .orchestrator import EpisodeReport, EpisodeRunner, EpisodeState
from .pointcloud import PointCloud, load_ply, save_ply
from .safety_policy import (
    HandModel,
    Trajectory,
    collision_probability,
    collision_report,
    swept_voxels,
    two_finger_hand,
)
from .scene import Box, Cylinder, Mesh, SceneModel, Sphere, Tube, load_scene, save_scene
from .scenes import BUILTIN_SCENES, get_scene
from .sensor import NoiseParams, capture, integrate, segment

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_SCENES",
    "Box",
    "CameraIntrinsics",
    "Config",
    "Contact",
    "ContactObservation",
    "Cylinder",
    "DepthImage",
    "EpisodeReport",
    "EpisodeRunner",
    "EpisodeState",
    "FingerLinkNormals",
    "Frustum",
    "GraspHypothesis",
    "GraspOutcome",
    "GraspParams",
    "HandModel",
    "InverseSensorModel",
    "KERNEL_IMPLEMENTATION",
    "Mesh",
    "NoiseParams",
    "OccupancyMap",
    "OracleParams",
    "PointCloud",
    "Pose",
    "SceneModel",
    "Sphere",
    "Trajectory",
    "Tube",
    "ViewCandidate",
    "capture",
    "collision_probability",
    "collision_report",
    "find_grasp",
    "generate_view_sphere",
    "get_scene",
    "ground_truth_grasp_oracle",
    "information_gain",
    "integrate",
    "load_ply",
    "load_scene",
    "look_at",
    "save_ply",
    "save_scene",
    "segment",
    "swept_voxels",
    "two_finger_hand",
]
