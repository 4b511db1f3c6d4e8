"""Occluded-manipulation simulator: world, rendering, sound, oracles."""

from .audio import BURST_FREQ, synth_audio
from .expert import InterventionGate, ScriptedExpert
from .render import render
from .types import Action, EnvConfig, Observation, ObjectKind, SimState, StepInfo, Task
from .world import GEOMETRY, OccludedManipEnv, region_of

__all__ = [
    "Action", "EnvConfig", "Observation", "ObjectKind", "SimState",
    "StepInfo", "Task", "OccludedManipEnv", "ScriptedExpert",
    "InterventionGate", "render", "synth_audio", "BURST_FREQ",
    "GEOMETRY", "region_of",
]
