"""Episode control: exploration loop, safety loop, the outer active-grasp loop,
and the budget-matched random baseline.

Exploration takes views (contact-driven when contacts exist, information-gain
otherwise) until a grasp is found after at least two views, or seven views
pass without one. The best candidate trajectory then undergoes safety
exploration until no view promises appreciable gain over its swept volume; if
its collision probability clears the alpha gate, the grasp "executes" against
the ground-truth oracle, otherwise the trajectory is rejected and the outer
loop re-enters exploration.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import contact_policy, infogain_policy
from .camera import CameraIntrinsics, ViewCandidate, generate_view_sphere
from .config import Config
from .contact_policy import ContactObservation, FingerLinkNormals, ViewsExhaustedError
from .grasp import GraspHypothesis, GraspOutcome, OracleParams, find_grasp, ground_truth_grasp_oracle
from .occupancy import InverseSensorModel, OccupancyMap
from .pointcloud import PointCloud
from .safety_policy import (
    collision_probability,
    collision_report,
    select_safety_view,
    swept_voxels,
    two_finger_hand,
)
from .scene import SceneModel
from .sensor import NoiseParams, capture, integrate, ray_endpoints, segment

PHASE_EXPLORATION = "exploration"
PHASE_SAFETY = "safety"
PHASE_DONE = "done"


class EpisodeAborted(RuntimeError):
    """The candidate view set ran out before the stopping rule fired."""


@dataclass
class EpisodeState:
    """Everything an episode threads through its phases."""

    views: list[ViewCandidate]
    occ_map: OccupancyMap
    cloud: PointCloud = field(default_factory=PointCloud)
    visited: list[ViewCandidate] = field(default_factory=list)
    trajectories: list[GraspHypothesis] = field(default_factory=list)
    omega: list[ContactObservation] = field(default_factory=list)
    fingers: FingerLinkNormals | None = None
    best: GraspHypothesis | None = None
    best_planned_at: int = 0  # |V| when the current best hypothesis was planned
    phase: str = PHASE_EXPLORATION
    seed: int = 0
    rejected: set = field(default_factory=set)
    log: list[dict] = field(default_factory=list)


@dataclass
class EpisodeReport:
    """Deterministic record of one episode."""

    scene_name: str
    policy: str
    seed: int
    executed: bool
    outcome: GraspOutcome | None
    p_collision: float
    phase1_views: list[int]
    phase2_views: list[int]
    total_views: int
    grasp_views: int
    rounds: int
    alpha: float
    beta: float
    log: list[dict] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.executed and self.outcome is not None and self.outcome.success

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["success"] = self.success
        if self.outcome is not None:
            d["outcome"] = {"safe": self.outcome.safe, "stable": self.outcome.stable, "success": self.outcome.success}
        return d


class EpisodeRunner:
    """Runs episodes of one scene under a fixed config."""

    def __init__(self, scene: SceneModel, config: Config | None = None, scene_name: str = "scene"):
        self.scene = scene
        self.config = config or Config()
        self.scene_name = scene_name
        cam = self.config.camera
        self.intrinsics = CameraIntrinsics.from_fov(cam.width, cam.height, cam.hfov_deg)
        self.hand = two_finger_hand()
        vs = self.config.view_sphere
        center = scene.centroid.copy()
        center[2] = scene.table_height + vs.center_height
        self.center = center
        self.views = generate_view_sphere(center, (vs.inner_radius, vs.outer_radius), vs.count)
        m = self.config.map
        self.sensor_model = InverseSensorModel(
            l_occ=m.l_occ,
            l_miss=m.l_miss,
            l_min=m.l_min,
            l_max=m.l_max,
            p_occ_thresh=m.p_occ_thresh,
            p_free_thresh=m.p_free_thresh,
        )
        self.oracle_params = dataclasses.replace(
            self.config.oracle,
            contact_tol=max(self.config.oracle.contact_tol, m.resolution),
            r_contact=self.config.r_contact,
        )
        self._swept_cache: dict[tuple, set] = {}

    # -- shared pipeline steps ---------------------------------------------

    def new_state(self, seed: int) -> EpisodeState:
        occ_map = OccupancyMap(
            self.scene.workspace_min,
            self.scene.workspace_max,
            self.config.map.resolution,
            self.sensor_model,
        )
        return EpisodeState(views=list(self.views), occ_map=occ_map, seed=seed)

    def take_view(self, state: EpisodeState, view: ViewCandidate, rng: np.random.Generator) -> None:
        """capture -> segment -> integrate -> map update, then bookkeeping."""
        cfg = self.config
        state.visited.append(view)
        noise = NoiseParams(cfg.noise.sigma0, cfg.noise.sigma1)
        depth = capture(
            self.scene, view, noise, self.intrinsics, near=cfg.camera.near, far=cfg.camera.far, rng=rng
        )
        seg = segment(
            depth,
            view,
            table_height=self.scene.table_height,
            eps_plane=cfg.episode.eps_plane,
            workspace_min=self.scene.workspace_min,
            workspace_max=self.scene.workspace_max,
        )
        state.cloud = integrate(state.cloud, seg, cfg.map.resolution)
        endpoints, hit = ray_endpoints(depth, view, far=cfg.camera.far)
        stride = max(1, cfg.episode.ray_stride)
        state.occ_map.insert_rays(view.position, endpoints[::stride], hit[::stride])
        state.log.append({"event": "view", "index": view.index, "cloud_size": len(state.cloud)})

    def plan_grasp(self, state: EpisodeState) -> GraspHypothesis | None:
        hyp = find_grasp(
            state.cloud,
            self.config.grasp,
            self.hand,
            workspace_min=self.scene.workspace_min,
            workspace_max=self.scene.workspace_max,
        )
        if hyp is None:
            return None
        if _signature(hyp) in state.rejected:
            return None
        return hyp

    def _refresh_omega(self, state: EpisodeState, hyp: GraspHypothesis) -> None:
        state.omega = [
            contact_policy.update_best_quality(obs, state.visited) for obs in hyp.observations()
        ]
        state.fingers = hyp.finger_normals

    def swept_for(self, state: EpisodeState, hyp: GraspHypothesis):
        # the swept set depends only on the trajectory and grid geometry, not
        # on map contents, so it is safe to cache across rounds
        sig = _signature(hyp)
        cached = self._swept_cache.get(sig)
        if cached is None:
            cached = swept_voxels(
                state.occ_map,
                self.hand,
                hyp.trajectory,
                contacts=list(hyp.planned_contacts),
                r_contact=self.config.r_contact,
            )
            self._swept_cache[sig] = cached
        return cached

    def _p_collision(self, state: EpisodeState, hyp: GraspHypothesis) -> float:
        return collision_probability(state.occ_map, self.swept_for(state, hyp))

    # -- selection (policy dispatch, Alg. 2 structure) ----------------------

    def dispatch_view_selection(self, state: EpisodeState) -> ViewCandidate:
        """First view fixed; contacts present -> contact policy; else info gain."""
        if not state.visited:
            return state.views[0]
        unvisited = self._unvisited(state)
        if not unvisited:
            raise ViewsExhaustedError("no unvisited candidate views remain")
        if state.omega and state.fingers is not None:
            return contact_policy.select_contact_view(
                state.views,
                state.visited,
                state.omega,
                state.fingers,
                improvement_only=self.config.episode.improvement_only_contact_value,
            )
        if state.cloud.is_empty:
            return unvisited[0]
        region = state.occ_map.object_bounding_keys(state.cloud)
        return infogain_policy.select_infogain_view(
            state.views,
            state.visited,
            state.occ_map,
            region,
            self.intrinsics,
            near=self.config.camera.near,
            far=self.config.camera.far,
        )

    def _unvisited(self, state: EpisodeState) -> list[ViewCandidate]:
        seen = {v.index for v in state.visited}
        return [v for v in state.views if v.index not in seen]

    def _random_view(self, state: EpisodeState, rng: np.random.Generator) -> ViewCandidate:
        pool = self._unvisited(state)
        if not pool:
            raise ViewsExhaustedError("no unvisited candidate views remain")
        if not state.visited:
            return state.views[0]  # the fixed initial view applies to both policies
        return pool[int(rng.integers(len(pool)))]

    # -- phase loops --------------------------------------------------------

    def check_stop(self, state: EpisodeState) -> bool:
        n = len(state.visited)
        t = len(state.trajectories)
        cfg = self.config.episode
        return (n >= cfg.min_exploration_views and t >= 1) or n >= cfg.max_exploration_views

    def next_best_view_loop(
        self,
        state: EpisodeState,
        rng: np.random.Generator,
        random_policy: bool = False,
        budget: int | None = None,
        informed_best: bool = True,
    ) -> int:
        """One exploration phase; returns the number of views taken.

        ``informed_best`` picks the candidate trajectory with the lowest
        collision probability under the current map; when disabled (the
        ungated baseline, which ignores the collision model entirely) the
        generator's own top-scored hypothesis wins instead.
        """
        state.phase = PHASE_EXPLORATION
        taken = 0
        while True:
            if budget is not None and taken >= budget:
                break
            if len(state.visited) >= self.config.episode.max_total_views:
                break
            try:
                view = self._random_view(state, rng) if random_policy else self.dispatch_view_selection(state)
            except ViewsExhaustedError:
                raise EpisodeAborted("view set exhausted during exploration")
            self.take_view(state, view, rng)
            taken += 1
            hyp = self.plan_grasp(state)
            if hyp is not None:
                state.trajectories.append(hyp)
                self._refresh_omega(state, hyp)
                state.log.append({"event": "grasp", "score": hyp.score, "virtual": hyp.virtual_back})
            if budget is None and self.check_stop(state):
                break
        if state.trajectories:
            if informed_best:
                probs = [self._p_collision(state, h) for h in state.trajectories]
                best_i = int(np.argmin(probs))
                state.log.append({"event": "best_trajectory", "p": probs[best_i]})
            else:
                best_i = int(np.argmax([h.score for h in state.trajectories]))
                state.log.append({"event": "best_trajectory", "score": state.trajectories[best_i].score})
            state.best = state.trajectories[best_i]
            state.best_planned_at = len(state.visited)
        return taken

    def safety_exploration_loop(
        self,
        state: EpisodeState,
        rng: np.random.Generator,
        random_policy: bool = False,
        budget: int | None = None,
    ) -> tuple[int, float]:
        """One safety phase; returns (views taken, final collision probability).

        Stops before taking a view whose predicted gain over the swept volume
        is already <= beta (so a fully observed swept region costs no views).
        """
        assert state.best is not None
        state.phase = PHASE_SAFETY
        swept = self.swept_for(state, state.best)
        beta = self.config.safety.beta
        taken = 0
        while True:
            if budget is not None and taken >= budget:
                break
            if len(state.visited) >= self.config.episode.max_total_views:
                break
            try:
                view, value = select_safety_view(
                    state.views,
                    state.visited,
                    state.occ_map,
                    swept,
                    self.intrinsics,
                    near=self.config.camera.near,
                    far=self.config.camera.far,
                )
            except ViewsExhaustedError:
                state.log.append({"event": "safety_exhausted"})
                break
            if budget is None and value <= beta:
                break
            if random_policy:
                view = self._random_view(state, rng)
            self.take_view(state, view, rng)
            taken += 1
        p = collision_probability(state.occ_map, swept)
        state.log.append({"event": "safety_done", "p": p, "views": taken})
        return taken, p

    # -- outer loop ---------------------------------------------------------

    def active_grasp(self, seed: int = 0) -> EpisodeReport:
        """Full episode under the next-best-view policy."""
        return self._run_episode(seed, policy="nbv")

    def random_policy_episode(
        self,
        seed: int,
        budgets: list[tuple[int, int]] | None = None,
        apply_alpha_gate: bool = True,
    ) -> EpisodeReport:
        """Uniform-random baseline.

        ``budgets`` holds the paired per-round (exploration, safety) view
        counts of a completed next-best-view episode on the same scene; when
        None the random policy runs under its own stopping rules.
        """
        return self._run_episode(
            seed, policy="random", budgets=budgets, apply_alpha_gate=apply_alpha_gate
        )

    def _run_episode(
        self,
        seed: int,
        policy: str,
        budgets: list[tuple[int, int]] | None = None,
        apply_alpha_gate: bool = True,
    ) -> EpisodeReport:
        rng = np.random.default_rng(seed)
        state = self.new_state(seed)
        random_policy = policy == "random"
        alpha = self.config.safety.alpha
        phase1: list[int] = []
        phase2: list[int] = []
        executed = False
        outcome: GraspOutcome | None = None
        p_final = 1.0
        rounds = 0
        while len(state.visited) < self.config.episode.max_total_views:
            rounds += 1
            b1 = b2 = None
            if budgets is not None:
                if rounds - 1 < len(budgets):
                    b1, b2 = budgets[rounds - 1]
                else:
                    b1, b2 = budgets[-1] if budgets else (0, 0)
            try:
                taken1 = self.next_best_view_loop(
                    state, rng, random_policy=random_policy, budget=b1,
                    informed_best=apply_alpha_gate,
                )
            except EpisodeAborted:
                state.log.append({"event": "aborted", "phase": PHASE_EXPLORATION})
                break
            phase1.append(taken1)
            if state.best is None:
                state.log.append({"event": "no_grasp_found"})
                break
            if apply_alpha_gate:
                taken2, p_final = self.safety_exploration_loop(
                    state, rng, random_policy=random_policy, budget=b2
                )
                phase2.append(taken2)
            else:
                # the ungated baseline ignores the collision model: no safety
                # views, unconditional execution of the chosen trajectory
                p_final = self._p_collision(state, state.best)
                phase2.append(0)
            if (not apply_alpha_gate) or p_final <= alpha:
                executed = True
                outcome = ground_truth_grasp_oracle(self.scene, state.best, self.hand, self.oracle_params)
                report = collision_report(state.occ_map, self.swept_for(state, state.best))
                state.log.append({"event": "execute", "p": p_final, "report": report.as_dict()})
                break
            # reject the candidate and cycle back to exploration
            sig = _signature(state.best)
            state.rejected.add(sig)
            state.trajectories = [h for h in state.trajectories if _signature(h) not in state.rejected]
            state.log.append({"event": "reject", "p": p_final})
            state.best = None
            state.omega = []
            state.fingers = None
        state.phase = PHASE_DONE
        return EpisodeReport(
            scene_name=self.scene_name,
            policy=policy,
            seed=seed,
            executed=executed,
            outcome=outcome,
            p_collision=p_final,
            phase1_views=phase1,
            phase2_views=phase2,
            total_views=len(state.visited),
            grasp_views=state.best_planned_at,
            rounds=rounds,
            alpha=alpha,
            beta=self.config.safety.beta,
            log=state.log,
        )


def _signature(hyp: GraspHypothesis) -> tuple:
    """Stable identity of a hypothesis for rejection bookkeeping."""
    parts = []
    for p, a in zip(hyp.trajectory.poses, hyp.trajectory.apertures):
        parts.append(tuple(np.round(p.translation, 6)))
        parts.append(tuple(np.round(p.rotation, 6)))
        parts.append(round(a, 6))
    for c in hyp.planned_contacts:
        parts.append(tuple(np.round(c.position, 6)))
        parts.append(tuple(np.round(c.normal, 6)))
    return tuple(parts)
