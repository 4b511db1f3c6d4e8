"""Scripted expert and scripted intervention gate.

Both read the ground-truth state; neither is visible to the learned
policy except through the actions it records. The expert's phase is a
pure function of state, which the gate relies on: control returns to the
policy as soon as the expert's phase changes mid-intervention.

Demonstration trajectories are kept learnable from observations alone:
the expert always descends at the left edge of the (visually indicated)
object region and sweeps right, so the only ground-truth-dependent part
of a demo is *when* the sweep stops, and that moment is marked by the
contact sound.
"""

from __future__ import annotations

import math

import numpy as np

from .types import Action, EnvConfig, ObjectKind, SimState, Task
from .world import (
    BAG_RIM_MARGIN,
    GEOMETRY,
    PICKPLACE_CARRY_Z,
    PROBE_Z,
)

COMMIT_RADIUS = 0.014          # switch from sweep to precise grasp
DESCEND_OFFSET = 0.015         # entry point left of the object region
SWEEP_SPEED = 0.6              # fraction of delta_max during the sweep
PARK_POS = np.array([0.50, 0.75])

APPROACH = "approach"
SEARCH = "search"
GRASP = "grasp"
LIFT = "lift"
TRANSPORT = "transport"
DROP = "drop"
WAIT = "wait"
HOLD = "hold"
PARK = "park"


def descend_x(state: SimState) -> float:
    """Sweep entry point; depends only on what the camera can see."""
    geo = GEOMETRY[state.task]
    if state.task == Task.OCCLUDED_GRASP:
        ox, _, ow, _ = geo.occluder
        region_left = ox + state.indicator_id * (ow / 3.0)
        return region_left - DESCEND_OFFSET
    if state.task == Task.OCCLUDED_PICKPLACE:
        return geo.hard_range[0] - DESCEND_OFFSET
    if state.task == Task.BAG_EXTRACT:
        bag_cx = state.occluder_rect[0] + state.occluder_rect[2] / 2
        return bag_cx + geo.hard_range[0] - DESCEND_OFFSET
    return float(state.object_pos[0])  # probe bag is fully visible


def lift_target(state: SimState, cfg: EnvConfig) -> float:
    if state.task == Task.OCCLUDED_PICKPLACE:
        return PICKPLACE_CARRY_Z
    if state.task == Task.BAG_EXTRACT:
        rim = state.occluder_rect[1] + state.occluder_rect[3]
        return rim + BAG_RIM_MARGIN + 0.02
    if state.task == Task.PROBE_DECIDE:
        return PROBE_Z
    return cfg.z_lift + 0.04


class ScriptedExpert:
    """Ground-truth finite-state controller used for demos and interventions."""

    def __init__(self, cfg: EnvConfig | None = None, noise_scale: float = 0.1,
                 seed: int = 0):
        self.cfg = cfg if cfg is not None else EnvConfig()
        self.noise_scale = noise_scale
        self.rng = np.random.default_rng(seed)

    def reset(self, seed: int) -> None:
        self.rng = np.random.default_rng(seed)

    # ------------------------------------------------------------------
    def phase(self, state: SimState) -> str:
        cfg = self.cfg
        if state.task == Task.PROBE_DECIDE and state.probe_done:
            if state.object_kind != ObjectKind.SCREWS:
                return PARK
            if state.object_grasped:
                return HOLD
            return self._pregrasp_phase(state)
        if state.object_falling:
            return WAIT
        if state.object_grasped:
            if state.task == Task.PROBE_DECIDE:
                return LIFT if state.object_pos[1] < PROBE_Z - 0.005 else DROP
            if state.task == Task.OCCLUDED_PICKPLACE:
                if state.gripper_pos[1] < PICKPLACE_CARRY_Z - 0.01:
                    return LIFT
                if abs(state.gripper_pos[0] - state.bin_x) > 0.015:
                    return TRANSPORT
                return DROP
            return LIFT
        return self._pregrasp_phase(state)

    def _pregrasp_phase(self, state: SimState) -> str:
        cfg = self.cfg
        if state.gripper_pos[1] > cfg.obj_rest_z + 0.035:
            return APPROACH
        d = math.hypot(*(state.gripper_pos - state.object_pos))
        return GRASP if d < COMMIT_RADIUS else SEARCH

    # ------------------------------------------------------------------
    def action(self, state: SimState) -> Action:
        cfg = self.cfg
        ph = self.phase(state)
        dmax = cfg.delta_max
        gx, gz = state.gripper_pos
        ox, oz = state.object_pos
        dx = dz = 0.0
        grip = 0
        noisy = ph in (APPROACH, SEARCH, LIFT, TRANSPORT, PARK)

        if ph == APPROACH:
            ax = descend_x(state)
            dx = np.clip(ax - gx, -dmax, dmax)
            if abs(ax - gx) <= 0.008:
                dz = np.clip(cfg.obj_rest_z - gz, -dmax, dmax)
        elif ph == SEARCH:
            dx = SWEEP_SPEED * dmax * np.sign(ox - gx)
            dz = np.clip(oz - gz, -dmax, dmax)
        elif ph == GRASP:
            dx = np.clip(ox - gx, -dmax, dmax)
            dz = np.clip(oz - gz, -dmax, dmax)
            grip = 1
        elif ph == LIFT:
            dz = np.clip(lift_target(state, cfg) - gz, -dmax, dmax)
            grip = 1
        elif ph == TRANSPORT:
            dx = np.clip(state.bin_x - gx, -dmax, dmax)
            dz = np.clip(PICKPLACE_CARRY_Z - gz, -dmax, dmax)
            grip = 1
        elif ph == DROP:
            grip = 0
        elif ph == WAIT:
            grip = 0
        elif ph == HOLD:
            grip = 1
        elif ph == PARK:
            dx = np.clip(PARK_POS[0] - gx, -dmax, dmax)
            dz = np.clip(PARK_POS[1] - gz, -dmax, dmax)
            grip = 0

        delta = np.array([dx, dz], dtype=np.float64)
        if noisy and self.noise_scale > 0:
            delta = delta + self.rng.uniform(-1.0, 1.0, 2) * self.noise_scale * dmax
        return Action(delta=np.clip(delta, -dmax, dmax), grip=grip)


class InterventionGate:
    """Scripted analog of the human deciding when to take over.

    Fires on (a) a missed object left behind, (b) a stall within grasp
    range without a close command, (c) a landed drop after a lift without
    success. Control is handed back once the expert's phase changes.
    """

    def __init__(self, expert: ScriptedExpert, cfg: EnvConfig | None = None,
                 m_miss: float = 0.07, k_stall: int = 5, away_steps: int = 3,
                 drop_guard: float = 0.12):
        self.expert = expert
        self.cfg = cfg if cfg is not None else expert.cfg
        self.m_miss = m_miss
        self.k_stall = k_stall
        self.away_steps = away_steps
        self.drop_guard = drop_guard
        self.reset()

    def reset(self) -> None:
        self.active = False
        self.phase_at_start: str | None = None
        self._stall = 0
        self._away = 0
        self._min_dist = math.inf
        self._prev_dist: float | None = None

    # ------------------------------------------------------------------
    def __call__(self, state: SimState, policy_action: Action) -> bool:
        if state.done:
            return False
        ph = self.expert.phase(state)
        if self.active:
            if ph != self.phase_at_start:
                # Script changed behavior: hand control back.
                self.active = False
                self._stall = 0
                self._away = 0
                self._prev_dist = None
                return False
            return True

        cfg = self.cfg
        d = math.hypot(*(state.gripper_pos - state.object_pos))
        self._min_dist = min(self._min_dist, d)
        if self._prev_dist is not None and d > self._prev_dist + 1e-12:
            self._away += 1
        elif self._prev_dist is not None:
            self._away = 0
        self._prev_dist = d

        if not state.object_grasped and d < cfg.r_grasp and policy_action.grip != 1:
            self._stall += 1
        else:
            self._stall = 0

        zone_top = state.occluder_rect[1] + state.occluder_rect[3] + 0.05
        missed = (
            not state.object_grasped
            and self._min_dist < cfg.r_contact
            and d > self.m_miss
            and self._away >= self.away_steps
            and state.gripper_pos[1] < zone_top
        )
        stalled = self._stall >= self.k_stall
        dropped = (
            state.peak_grasped_z >= cfg.obj_rest_z + self.drop_guard
            and not state.object_grasped
            and not state.object_falling
            and not state.success
        )

        if missed or stalled or dropped:
            self.active = True
            self.phase_at_start = ph
            self._stall = 0
            self._away = 0
            return True
        return False
