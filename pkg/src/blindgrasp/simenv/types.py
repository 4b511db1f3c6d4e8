"""Domain types for the occluded-manipulation simulator."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Task(str, enum.Enum):
    OCCLUDED_GRASP = "occluded_grasp"
    OCCLUDED_PICKPLACE = "occluded_pickplace"
    BAG_EXTRACT = "bag_extract"
    PROBE_DECIDE = "probe_decide"


class ObjectKind(str, enum.Enum):
    KEYS = "keys"
    SCREWS = "screws"
    PEANUTS = "peanuts"
    SILENT = "silent"


@dataclass(frozen=True)
class EnvConfig:
    """World constants. The desk defaults keep an episode around 100 steps
    and audio cheap; paper() restores the full-rate shapes."""

    image_hw: tuple[int, int] = (32, 32)
    fs: int = 4800
    control_hz: int = 20
    horizon: int = 100
    delta_max: float = 0.03
    r_grasp: float = 0.02
    r_contact: float = 0.035
    grip_cooldown: int = 10
    noise_sigma: float = 0.01
    burst_decay: float = 100.0
    g_fall: float = 0.05
    z_table: float = 0.10
    obj_half: float = 0.02
    z_lift: float = 0.50
    bin_tol: float = 0.05
    proprio_dim: int = 3

    @property
    def chunk(self) -> int:
        return self.fs // self.control_hz

    @property
    def buffer_len(self) -> int:
        return 2 * self.fs

    @property
    def obj_rest_z(self) -> float:
        return self.z_table + self.obj_half

    @classmethod
    def paper(cls) -> "EnvConfig":
        return cls(image_hw=(84, 84), fs=48000, horizon=400, proprio_dim=7)


@dataclass
class Action:
    """Continuous planar delta plus a binary gripper command (1 = close).

    The environment clamps the delta to +/- delta_max per axis and ignores
    gripper toggles within the cooldown window.
    """

    delta: np.ndarray
    grip: int = 0

    def __post_init__(self):
        self.delta = np.asarray(self.delta, dtype=np.float64)
        if self.delta.shape != (2,):
            raise ValueError(f"delta must be a 2-vector, got {self.delta.shape}")
        if self.grip not in (0, 1):
            raise ValueError(f"grip must be 0 or 1, got {self.grip}")


@dataclass
class Observation:
    """One control tick of sensor data."""

    visual: np.ndarray      # (H, W, 3) uint8
    audio_wave: np.ndarray  # (2*fs,) float32, oldest sample first
    audio_force: float      # contact-force proxy for this step
    proprio: np.ndarray     # (proprio_dim,) float32: x, z, jaw, [padding]


@dataclass(eq=False)
class SimState:
    """Ground-truth world state; the policy never sees this directly."""

    gripper_pos: np.ndarray
    jaw: float                      # 0 = closed, 1 = open
    object_pos: np.ndarray
    object_grasped: bool
    object_kind: ObjectKind
    occluder_rect: np.ndarray       # (x, z, w, h)
    indicator_id: int               # region index; -1 when unused
    bin_x: float                    # nan when unused
    t: int
    contact_impulse: float
    task: Task
    difficulty: str = "easy"
    done: bool = False
    success: bool = False
    probe_done: bool = False
    # transition bookkeeping
    object_falling: bool = False
    fall_start_z: float = 0.0
    last_grip_change_t: int = -1000
    overlap_obj: bool = False
    overlap_occ: bool = False
    peak_grasped_z: float = 0.0
    contact_events: tuple = field(default_factory=tuple)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimState):
            return NotImplemented
        for name in self.__dataclass_fields__:
            a, b = getattr(self, name), getattr(other, name)
            if isinstance(a, np.ndarray):
                if not np.array_equal(a, b):
                    return False
            elif isinstance(a, float):
                if not (a == b or (math.isnan(a) and math.isnan(b))):
                    return False
            elif a != b:
                return False
        return True


@dataclass(frozen=True)
class StepInfo:
    success: bool
    done: bool
    contact_impulse: float = 0.0
    events: tuple = ()
