"""Run configuration: every tunable default in one place, loadable from YAML."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from math import log

import yaml

from .grasp import GraspParams, OracleParams


@dataclass(frozen=True)
class CameraConfig:
    width: int = 160
    height: int = 120
    hfov_deg: float = 60.0
    near: float = 0.05
    far: float = 2.0


@dataclass(frozen=True)
class NoiseConfig:
    sigma0: float = 0.001
    sigma1: float = 0.002


@dataclass(frozen=True)
class ViewSphereConfig:
    inner_radius: float = 0.5
    outer_radius: float = 0.7
    count: int = 34
    center_height: float = 0.05  # gaze target height above the table


@dataclass(frozen=True)
class MapConfig:
    resolution: float = 0.005
    # paper-fidelity mode: resolution = 0.0025
    p_hit: float = 0.7
    p_miss: float = 0.4
    l_min: float = -2.0
    l_max: float = 3.5
    p_occ_thresh: float = 0.75
    p_free_thresh: float = 0.25

    @property
    def l_occ(self) -> float:
        return log(self.p_hit / (1.0 - self.p_hit))

    @property
    def l_miss(self) -> float:
        return log(self.p_miss / (1.0 - self.p_miss))


@dataclass(frozen=True)
class SafetyConfig:
    alpha: float = 0.1  # max admissible collision probability for execution
    beta: float = 0.005  # min gain (nats/voxel) that keeps safety exploration running
    r_contact_voxels: float = 2.0  # contact exclusion radius in voxel edges


@dataclass(frozen=True)
class EpisodeConfig:
    max_exploration_views: int = 7
    min_exploration_views: int = 2
    max_total_views: int = 20
    eps_plane: float = 0.005
    ray_stride: int = 1  # insert every ray_stride-th pixel ray into the map
    improvement_only_contact_value: bool = False


@dataclass(frozen=True)
class Config:
    camera: CameraConfig = field(default_factory=CameraConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    view_sphere: ViewSphereConfig = field(default_factory=ViewSphereConfig)
    map: MapConfig = field(default_factory=MapConfig)
    safety: SafetyConfig = field(default_factory=SafetyConfig)
    episode: EpisodeConfig = field(default_factory=EpisodeConfig)
    grasp: GraspParams = field(default_factory=GraspParams)
    oracle: OracleParams = field(default_factory=OracleParams)

    @property
    def r_contact(self) -> float:
        return self.safety.r_contact_voxels * self.map.resolution

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        kwargs = {}
        for f in dataclasses.fields(cls):
            sub = data.get(f.name)
            sub_cls = f.default_factory  # type: ignore[union-attr]
            if sub is None:
                kwargs[f.name] = sub_cls()
            else:
                valid = {x.name for x in dataclasses.fields(sub_cls)}
                unknown = set(sub) - valid
                if unknown:
                    raise ValueError(f"unknown {f.name} config fields: {sorted(unknown)}")
                kwargs[f.name] = sub_cls(**sub)
        extra = set(data) - {f.name for f in dataclasses.fields(cls)}
        if extra:
            raise ValueError(f"unknown config sections: {sorted(extra)}")
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str) -> "Config":
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        return cls.from_dict(data)

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False)

    def with_resolution(self, resolution: float) -> "Config":
        return dataclasses.replace(self, map=dataclasses.replace(self.map, resolution=resolution))

    def paper_fidelity(self) -> "Config":
        """Fine-voxel mode (0.0025 m)."""
        return self.with_resolution(0.0025)
