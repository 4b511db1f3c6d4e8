"""Vertical-plane kinematic world with occlusion and contact sound.

The occluder is penetrable (a wall curtain or bag): the gripper may move
through it, which rings the quiet occluder burst on entry. Object contact
rings on the overlap rising edge; landings ring with intensity scaled by
drop height. The object is a point mass that rests on the table, tracks
the gripper exactly while grasped, and falls when released.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import audio, render
from .types import Action, EnvConfig, Observation, ObjectKind, SimState, StepInfo, Task


@dataclass(frozen=True)
class TaskGeometry:
    """Static layout of one task. Object x ranges are (lo, hi) per
    difficulty; descend_margin places the expert's entry point left of lo."""

    occluder: tuple[float, float, float, float]
    easy_range: tuple[float, float]
    hard_range: tuple[float, float]


GEOMETRY: dict[Task, TaskGeometry] = {
    Task.OCCLUDED_GRASP: TaskGeometry(
        occluder=(0.25, 0.10, 0.50, 0.35),
        easy_range=(0.43, 0.57),
        hard_range=(0.28, 0.72),
    ),
    Task.OCCLUDED_PICKPLACE: TaskGeometry(
        occluder=(0.15, 0.10, 0.30, 0.30),
        easy_range=(0.26, 0.34),
        hard_range=(0.20, 0.40),
    ),
    Task.BAG_EXTRACT: TaskGeometry(
        occluder=(0.0, 0.10, 0.30, 0.30),  # x set per episode from bag center
        easy_range=(-0.04, 0.04),          # keys offset from bag center
        hard_range=(-0.12, 0.12),
    ),
    Task.PROBE_DECIDE: TaskGeometry(
        occluder=(0.0, 0.0, 0.10, 0.09),   # tracks the bag-object
        easy_range=(0.45, 0.55),
        hard_range=(0.40, 0.60),
    ),
}

N_REGIONS = 3
BIN_X_RANGE = (0.62, 0.84)
BAG_CX_RANGE = (0.40, 0.60)
PICKPLACE_CARRY_Z = 0.50
BAG_RIM_MARGIN = 0.05
PROBE_Z = 0.42
PROBE_MIN_FALL = 0.15
GRIPPER_X_BOUNDS = (0.03, 0.97)
GRIPPER_Z_BOUNDS = (0.105, 0.95)


def region_of(x: float, occluder: tuple[float, float, float, float]) -> int:
    ox, _, ow, _ = occluder
    idx = int((x - ox) / (ow / N_REGIONS))
    return min(max(idx, 0), N_REGIONS - 1)


def _probe_occluder(obj: np.ndarray) -> np.ndarray:
    w, h = GEOMETRY[Task.PROBE_DECIDE].occluder[2:]
    return np.array([obj[0] - w / 2, obj[1] - 0.045, w, h])


class OccludedManipEnv:
    """Gym-style single-instance environment; all randomness flows from
    the reset seed."""

    def __init__(self, cfg: EnvConfig | None = None):
        self.cfg = cfg if cfg is not None else EnvConfig()
        self.state: SimState | None = None
        self._audio_buf: np.ndarray | None = None
        self._audio_rng: np.random.Generator | None = None

    # ------------------------------------------------------------------
    def reset(self, task: Task | str, seed: int, difficulty: str = "easy"
              ) -> tuple[SimState, Observation]:
        try:
            task = Task(task)
        except ValueError:
            raise ValueError(f"unknown task {task!r}") from None
        if difficulty not in ("easy", "hard"):
            raise ValueError(f"unknown difficulty {difficulty!r}")
        cfg = self.cfg
        rng = np.random.default_rng(seed)
        geo = GEOMETRY[task]
        lo, hi = geo.easy_range if difficulty == "easy" else geo.hard_range

        bin_x = math.nan
        kind = ObjectKind.KEYS
        occluder = np.array(geo.occluder, dtype=np.float64)
        if task == Task.OCCLUDED_PICKPLACE:
            obj_x = rng.uniform(lo, hi)
            bin_x = rng.uniform(*BIN_X_RANGE)
        elif task == Task.BAG_EXTRACT:
            bag_cx = rng.uniform(*BAG_CX_RANGE)
            occluder[0] = bag_cx - geo.occluder[2] / 2
            obj_x = bag_cx + rng.uniform(lo, hi)
        elif task == Task.PROBE_DECIDE:
            obj_x = rng.uniform(lo, hi)
            kind = ObjectKind.SCREWS if rng.integers(2) else ObjectKind.PEANUTS
        else:
            obj_x = rng.uniform(lo, hi)

        obj = np.array([obj_x, cfg.obj_rest_z])
        if task == Task.PROBE_DECIDE:
            occluder = _probe_occluder(obj)
        indicator = region_of(obj_x, geo.occluder) if task == Task.OCCLUDED_GRASP else -1

        self.state = SimState(
            gripper_pos=np.array([0.50, 0.75]),
            jaw=1.0,
            object_pos=obj,
            object_grasped=False,
            object_kind=kind,
            occluder_rect=occluder,
            indicator_id=indicator,
            bin_x=bin_x,
            t=0,
            contact_impulse=0.0,
            task=task,
            difficulty=difficulty,
        )
        self._audio_rng = np.random.default_rng(rng.integers(2 ** 63))
        self._audio_buf = (self._audio_rng.standard_normal(cfg.buffer_len)
                           * cfg.noise_sigma).astype(np.float32)
        return self.state, self._observation()

    # ------------------------------------------------------------------
    def step(self, action: Action) -> tuple[SimState, Observation, StepInfo]:
        s = self.state
        if s is None:
            raise RuntimeError("reset() before step()")
        if s.done:
            raise RuntimeError("episode is done; reset() to start a new one")
        cfg = self.cfg
        events: list[tuple[float, str]] = []

        # Gripper kinematics.
        delta = np.clip(action.delta, -cfg.delta_max, cfg.delta_max)
        s.gripper_pos = np.array([
            np.clip(s.gripper_pos[0] + delta[0], *GRIPPER_X_BOUNDS),
            np.clip(s.gripper_pos[1] + delta[1], *GRIPPER_Z_BOUNDS),
        ])

        # Gripper command, subject to the hard cooldown.
        jaw_closed = s.jaw < 0.5
        want_closed = action.grip == 1
        if want_closed != jaw_closed and s.t - s.last_grip_change_t >= cfg.grip_cooldown:
            s.jaw = 0.0 if want_closed else 1.0
            s.last_grip_change_t = s.t
            if want_closed and not s.object_grasped and not s.object_falling \
                    and _dist(s.gripper_pos, s.object_pos) < cfg.r_grasp:
                s.object_grasped = True
            elif not want_closed and s.object_grasped:
                s.object_grasped = False
                s.object_falling = True
                s.fall_start_z = float(s.object_pos[1])

        # Carried object tracks the gripper exactly.
        if s.object_grasped:
            s.object_pos = s.gripper_pos.copy()
            s.peak_grasped_z = max(s.peak_grasped_z, float(s.object_pos[1]))

        # Gravity and landing.
        landed_in_bin = False
        if not s.object_grasped and s.object_pos[1] > cfg.obj_rest_z:
            if not s.object_falling:
                s.object_falling = True
                s.fall_start_z = float(s.object_pos[1])
            nz = s.object_pos[1] - cfg.g_fall
            if nz <= cfg.obj_rest_z:
                nz = cfg.obj_rest_z
                fall = s.fall_start_z - cfg.obj_rest_z
                if fall > 1e-9:
                    impulse = min(1.0, 0.3 + 3.0 * fall)
                    events.append((impulse, s.object_kind.value))
                if s.task == Task.OCCLUDED_PICKPLACE and \
                        abs(s.object_pos[0] - s.bin_x) < cfg.bin_tol:
                    landed_in_bin = True
                if s.task == Task.PROBE_DECIDE and fall >= PROBE_MIN_FALL:
                    s.probe_done = True
                    s.peak_grasped_z = 0.0  # the probe drop is intentional
                s.object_falling = False
            s.object_pos = np.array([s.object_pos[0], nz])

        # Contact rising edges at post-move positions.
        if s.object_grasped or s.object_falling:
            s.overlap_obj = True  # suppress ring while carried or mid-fall
        else:
            near = _dist(s.gripper_pos, s.object_pos) < cfg.r_contact
            if near and not s.overlap_obj:
                events.append((1.0, s.object_kind.value))
            s.overlap_obj = near
        in_occ = _point_in_rect(s.gripper_pos, s.occluder_rect, inflate=0.01)
        if in_occ and not s.overlap_occ:
            events.append((audio.OCCLUDER_IMPULSE_SCALE, "occluder"))
        s.overlap_occ = in_occ

        # Probe task: keep the bag visual glued to the bag-object.
        if s.task == Task.PROBE_DECIDE:
            s.occluder_rect = _probe_occluder(s.object_pos)

        s.t += 1
        s.contact_events = tuple(events)
        s.contact_impulse = float(sum(i for i, _ in events))

        # Audio advances by one control tick.
        chunk = audio.render_chunk(events, cfg.chunk, cfg.fs, self._audio_rng,
                                   cfg.noise_sigma, cfg.burst_decay)
        from .. import dsp
        self._audio_buf = dsp.push_samples(self._audio_buf, chunk)

        # Success criteria.
        if s.task == Task.OCCLUDED_GRASP:
            if s.object_pos[1] >= cfg.z_lift:
                s.success = True
        elif s.task == Task.OCCLUDED_PICKPLACE:
            if landed_in_bin:
                s.success = True
        elif s.task == Task.BAG_EXTRACT:
            rim = s.occluder_rect[1] + s.occluder_rect[3]
            if s.object_grasped and s.object_pos[1] >= rim + BAG_RIM_MARGIN:
                s.success = True
        elif s.task == Task.PROBE_DECIDE and s.t >= cfg.horizon:
            s.success = s.object_grasped == (s.object_kind == ObjectKind.SCREWS)

        if s.task == Task.PROBE_DECIDE:
            s.done = s.t >= cfg.horizon
        else:
            s.done = s.success or s.t >= cfg.horizon

        info = StepInfo(success=s.success, done=s.done,
                        contact_impulse=s.contact_impulse, events=s.contact_events)
        return s, self._observation(), info

    # ------------------------------------------------------------------
    def _observation(self) -> Observation:
        s = self.state
        cfg = self.cfg
        force = float(sum(i for i, k in s.contact_events if k != "occluder"))
        proprio = np.zeros(cfg.proprio_dim, dtype=np.float32)
        proprio[:3] = (s.gripper_pos[0], s.gripper_pos[1], s.jaw)
        return Observation(
            visual=render.render(s, cfg),
            audio_wave=self._audio_buf.copy(),
            audio_force=force,
            proprio=proprio,
        )


def _dist(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def _point_in_rect(p: np.ndarray, rect: np.ndarray, inflate: float = 0.0) -> bool:
    x, z, w, h = rect
    return (x - inflate <= p[0] <= x + w + inflate
            and z - inflate <= p[1] <= z + h + inflate)
