"""Deterministic rasterization of the scene.

Painter's order puts the occluder after the object, so anything inside
the occluder footprint is hidden by construction; the gripper is drawn
last because the arm hangs between the camera and the scene. Axis
convention: world x maps to columns, world z to rows with z up.
"""

from __future__ import annotations

import math

import numpy as np

from .types import EnvConfig, SimState, Task

BG = (15, 18, 30)
TABLE = (110, 85, 60)
WALL = (70, 95, 170)
BAG = (160, 130, 95)
OBJECT = (220, 50, 45)
INDICATOR = (250, 210, 40)
BIN = (40, 160, 70)
GRIPPER = (230, 230, 235)


def _fill(img: np.ndarray, x: float, z: float, w: float, h: float, color) -> None:
    hh, ww = img.shape[:2]
    c0 = max(0, int(math.floor(x * ww)))
    c1 = min(ww, int(math.ceil((x + w) * ww)))
    r0 = max(0, hh - int(math.ceil((z + h) * hh)))
    r1 = min(hh, hh - int(math.floor(z * hh)))
    if c0 < c1 and r0 < r1:
        img[r0:r1, c0:c1] = color


def _inside(inner: tuple[float, float, float, float], rect: np.ndarray) -> bool:
    ix, iz, iw, ih = inner
    rx, rz, rw, rh = rect
    return ix >= rx and iz >= rz and ix + iw <= rx + rw and iz + ih <= rz + rh


def render(state: SimState, cfg: EnvConfig) -> np.ndarray:
    h, w = cfg.image_hw
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:] = BG
    _fill(img, 0.0, 0.0, 1.0, cfg.z_table, TABLE)

    if state.task == Task.OCCLUDED_PICKPLACE and not math.isnan(state.bin_x):
        _fill(img, state.bin_x - 0.06, cfg.z_table, 0.12, 0.05, BIN)

    if state.task == Task.OCCLUDED_GRASP and state.indicator_id >= 0:
        ox, oz, ow, oh = state.occluder_rect
        rw = ow / 3.0
        _fill(img, ox + state.indicator_id * rw, oz + oh + 0.02, rw, 0.05, INDICATOR)

    s = cfg.obj_half
    obj = (state.object_pos[0] - s, state.object_pos[1] - s, 2 * s, 2 * s)
    if not _inside(obj, state.occluder_rect):
        _fill(img, *obj, OBJECT)

    occ_color = BAG if state.task in (Task.BAG_EXTRACT, Task.PROBE_DECIDE) else WALL
    ox, oz, ow, oh = state.occluder_rect
    _fill(img, ox, oz, ow, oh, occ_color)

    gw = 0.04 + 0.06 * state.jaw
    _fill(img, state.gripper_pos[0] - gw / 2, state.gripper_pos[1] - 0.03,
          gw, 0.06, GRIPPER)
    return img
