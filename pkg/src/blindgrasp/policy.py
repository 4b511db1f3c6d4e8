"""Multimodal recurrent policy.

Per timestep, three stacked past frames run through a residual-lite CNN,
the two-second audio window runs through spectrogram + 1D convs (or the
scalar contact-force proxy is passed straight in), and both embeddings
are concatenated with proprioception and fused by an MLP into a joint
embedding. A one-layer LSTM consumes the joint embeddings of the last H
timesteps from a zero initial state; the final hidden state feeds the
action head. Inference is stateless: every call recomputes its window,
so the action depends on exactly the last H observations.

Ablation switches zero out the corresponding *input* (vision, audio) or
collapse the window and frame stack to one step (memory), mirroring how
such ablations are usually run: the architecture stays in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dsp, nn
from .nn import ParamStore, Tensor
from .simenv.types import Action, Observation


@dataclass(frozen=True)
class PolicyConfig:
    image_hw: tuple[int, int] = (32, 32)
    window: int = 10                 # H
    joint_dim: int = 50              # D: joint embedding and LSTM width
    frame_stack: int = 3
    e_v_dim: int = 64
    vis_channels: tuple[int, ...] = (16, 24, 32)
    audio_input: str = "spectrogram"  # or "force"
    spec_cfg: dsp.SpectrogramConfig = field(default_factory=lambda: dsp.DESK)
    audio_channels: tuple[int, int] = (64, 33)
    audio_kernels: tuple[int, int] = (7, 3)
    audio_strides: tuple[int, int] = (3, 2)
    fusion_hidden: tuple[int, ...] = (128, 128)
    head_hidden: tuple[int, ...] = (128, 128)
    proprio_dim: int = 3
    delta_max: float = 0.03
    ablate_vision: bool = False
    ablate_audio: bool = False
    ablate_memory: bool = False

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.audio_input not in ("spectrogram", "force"):
            raise ValueError(f"unknown audio_input {self.audio_input!r}")

    @property
    def eff_window(self) -> int:
        return 1 if self.ablate_memory else self.window

    @property
    def eff_stack(self) -> int:
        return 1 if self.ablate_memory else self.frame_stack

    @property
    def in_channels(self) -> int:
        return 3 * self.eff_stack

    @property
    def audio_frames(self) -> int:
        return self.spec_cfg.n_frames

    @property
    def e_s_dim(self) -> int:
        if self.audio_input == "force":
            return 1
        length = self.audio_frames
        for k, s in zip(self.audio_kernels, self.audio_strides):
            length = (length - k) // s + 1
        return self.audio_channels[-1] * length

    @property
    def fuse_in_dim(self) -> int:
        return self.e_v_dim + self.e_s_dim + self.proprio_dim

    @classmethod
    def paper(cls, **overrides) -> "PolicyConfig":
        defaults = dict(
            image_hw=(84, 84), e_v_dim=512, vis_channels=(32, 64, 128),
            spec_cfg=dsp.PAPER, fusion_hidden=(1024, 1024),
            head_hidden=(1024, 1024), proprio_dim=7,
        )
        defaults.update(overrides)
        return cls(**defaults)


def build_policy(cfg: PolicyConfig, rng: np.random.Generator,
                 dtype=np.float32) -> ParamStore:
    ps = ParamStore(rng=rng, dtype=dtype)
    c_in = cfg.in_channels
    for i, c_out in enumerate(cfg.vis_channels):
        ps.param(f"vis/b{i}/conv_w", (c_out, c_in, 3, 3))
        ps.param(f"vis/b{i}/conv_b", (c_out,), init="zeros")
        ps.param(f"vis/b{i}/skip_w", (c_out, c_in, 1, 1))
        c_in = c_out
    ps.param("vis/fc_w", (cfg.vis_channels[-1], cfg.e_v_dim))
    ps.param("vis/fc_b", (cfg.e_v_dim,), init="zeros")

    if cfg.audio_input == "spectrogram":
        s_ch = cfg.spec_cfg.keep_bins
        a1, a2 = cfg.audio_channels
        k1, k2 = cfg.audio_kernels
        ps.param("aud/c1_w", (a1, s_ch, k1))
        ps.param("aud/c1_b", (a1,), init="zeros")
        ps.param("aud/c2_w", (a2, a1, k2))
        ps.param("aud/c2_b", (a2,), init="zeros")

    dims = (cfg.fuse_in_dim, *cfg.fusion_hidden, cfg.joint_dim)
    for i, (din, dout) in enumerate(zip(dims[:-1], dims[1:])):
        ps.param(f"fuse/l{i}_w", (din, dout))
        ps.param(f"fuse/l{i}_b", (dout,), init="zeros")

    d = cfg.joint_dim
    ps.param("lstm/wx", (d, 4 * d), init="uniform")
    ps.param("lstm/wh", (d, 4 * d), init="uniform")
    ps.param("lstm/b", (4 * d,), init="zeros")
    ps["lstm/b"].data[d:2 * d] = 1.0  # forget-gate bias

    dims = (d, *cfg.head_hidden, 3)
    for i, (din, dout) in enumerate(zip(dims[:-1], dims[1:])):
        ps.param(f"head/l{i}_w", (din, dout))
        ps.param(f"head/l{i}_b", (dout,), init="zeros")
    return ps


# ----------------------------------------------------------------------
# Encoders
# ----------------------------------------------------------------------

def encode_visual(params: ParamStore, cfg: PolicyConfig, frames: Tensor) -> Tensor:
    """Residual-lite CNN: stride-2 blocks, global average pool, linear."""
    if frames.data.ndim != 4 or frames.shape[1] != cfg.in_channels:
        raise ValueError(
            f"expected (N, {cfg.in_channels}, H, W) frames, got {frames.shape}"
        )
    x = frames
    for i in range(len(cfg.vis_channels)):
        # padded 3x3 and unpadded 1x1 at stride 2 land on the same size
        main = nn.conv2d(x, params[f"vis/b{i}/conv_w"], params[f"vis/b{i}/conv_b"],
                         stride=2, pad=1)
        skip = nn.conv2d(x, params[f"vis/b{i}/skip_w"], stride=2, pad=0)
        x = nn.relu(nn.add(main, skip))
    pooled = nn.mean(x, axis=(2, 3))
    return nn.add(nn.matmul(pooled, params["vis/fc_w"]), params["vis/fc_b"])


def encode_audio(params: ParamStore, cfg: PolicyConfig, spec: Tensor) -> Tensor:
    """1D convs along time over the spectrogram, frequency bins as
    channels; the result is flattened into the audio embedding."""
    if cfg.audio_input != "spectrogram":
        raise ValueError("encode_audio requires audio_input='spectrogram'")
    expected = (cfg.spec_cfg.keep_bins, cfg.audio_frames)
    if spec.data.ndim != 3 or spec.shape[1:] != expected:
        raise ValueError(
            f"expected (N, {expected[0]}, {expected[1]}) spectrogram, got {spec.shape}"
        )
    x = nn.relu(nn.conv1d(spec, params["aud/c1_w"], params["aud/c1_b"],
                          stride=cfg.audio_strides[0]))
    x = nn.relu(nn.conv1d(x, params["aud/c2_w"], params["aud/c2_b"],
                          stride=cfg.audio_strides[1]))
    return nn.reshape(x, (x.shape[0], cfg.e_s_dim))


def _mlp(params: ParamStore, prefix: str, n_layers: int, x: Tensor,
         final_relu: bool = False) -> Tensor:
    for i in range(n_layers):
        x = nn.add(nn.matmul(x, params[f"{prefix}/l{i}_w"]), params[f"{prefix}/l{i}_b"])
        if final_relu or i < n_layers - 1:
            x = nn.relu(x)
    return x


def fuse_step(params: ParamStore, cfg: PolicyConfig, e_v: Tensor, e_s: Tensor,
              proprio: Tensor) -> Tensor:
    joint = nn.concat([e_v, e_s, proprio], axis=1)
    return _mlp(params, "fuse", len(cfg.fusion_hidden) + 1, joint)


# ----------------------------------------------------------------------
# Full forward pass
# ----------------------------------------------------------------------

def forward_window(params: ParamStore, cfg: PolicyConfig, vis: np.ndarray,
                   aud: np.ndarray, prop: np.ndarray) -> Tensor:
    """Raw head output for a batch of windows.

    vis: (B, T, C, h, w) float in [0, 1]; aud: (B, T, S, L) spectrograms
    or (B, T, 1) force; prop: (B, T, P). T must equal the effective
    window length. Returns raw (B, 3): two pre-tanh delta components and
    the gripper logit.
    """
    b, t = vis.shape[:2]
    if t != cfg.eff_window:
        raise ValueError(f"window length {t} != configured {cfg.eff_window}")
    if cfg.ablate_vision:
        vis = np.zeros_like(vis)
    if cfg.ablate_audio:
        aud = np.zeros_like(aud)

    e_v = encode_visual(params, cfg, Tensor(vis.reshape(b * t, *vis.shape[2:])))
    if cfg.audio_input == "spectrogram":
        e_s = encode_audio(params, cfg, Tensor(aud.reshape(b * t, *aud.shape[2:])))
    else:
        e_s = Tensor(aud.reshape(b * t, 1))
    z = fuse_step(params, cfg, e_v, e_s, Tensor(prop.reshape(b * t, -1)))

    z_steps = nn.split(nn.reshape(z, (b, t, cfg.joint_dim)), t, axis=1)
    dt = params.dtype
    h = Tensor(np.zeros((b, cfg.joint_dim), dtype=dt))
    c = Tensor(np.zeros((b, cfg.joint_dim), dtype=dt))
    for zt in z_steps:
        h, c = nn.lstm_cell(nn.reshape(zt, (b, cfg.joint_dim)), h, c,
                            params["lstm/wx"], params["lstm/wh"], params["lstm/b"])
    return _mlp(params, "head", len(cfg.head_hidden) + 1, h)


def prediction(raw: Tensor) -> Tensor:
    """Normalized action prediction: tanh on the delta components, raw
    gripper logit. Targets are (delta / delta_max, +/-1)."""
    parts = nn.split(raw, 3, axis=1)
    dxy = nn.tanh(nn.concat(parts[:2], axis=1))
    return nn.concat([dxy, parts[2]], axis=1)


def raw_to_action(raw: np.ndarray, cfg: PolicyConfig) -> Action:
    delta = np.tanh(raw[:2]) * cfg.delta_max
    return Action(delta=delta, grip=int(raw[2] > 0.0))


# ----------------------------------------------------------------------
# Window assembly from Observation objects (inference path)
# ----------------------------------------------------------------------

def _stack_indices(t: int, n: int, stack: int) -> list[int]:
    return [max(0, t - k) for k in range(stack - 1, -1, -1)]


def window_arrays(window: list[Observation], cfg: PolicyConfig,
                  dtype=np.float32) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Build (1, T, ...) arrays from the last-H observations, left-padding
    by repeating the first observation when the episode is younger than H."""
    if not window:
        raise ValueError("empty observation window")
    w = list(window)[-cfg.eff_window:]
    while len(w) < cfg.eff_window:
        w.insert(0, w[0])
    t_len = len(w)
    h, wd = cfg.image_hw
    vis = np.empty((1, t_len, cfg.in_channels, h, wd), dtype=dtype)
    prop = np.empty((1, t_len, cfg.proprio_dim), dtype=dtype)
    if cfg.audio_input == "spectrogram":
        aud = np.empty((1, t_len, cfg.spec_cfg.keep_bins, cfg.audio_frames),
                       dtype=dtype)
    else:
        aud = np.empty((1, t_len, 1), dtype=dtype)
    for i, obs in enumerate(w):
        frames = [w[j].visual for j in _stack_indices(i, t_len, cfg.eff_stack)]
        stacked = np.concatenate([f.transpose(2, 0, 1) for f in frames], axis=0)
        vis[0, i] = stacked.astype(dtype) / 255.0
        prop[0, i] = obs.proprio[: cfg.proprio_dim]
        if cfg.audio_input == "spectrogram":
            aud[0, i] = dsp.spectrogram(obs.audio_wave.astype(np.float64),
                                        cfg.spec_cfg).T.astype(dtype)
        else:
            aud[0, i, 0] = obs.audio_force
    return vis, aud, prop


def act(window: list[Observation], cfg: PolicyConfig, params: ParamStore
        ) -> tuple[Action, dict]:
    """Stateless windowed inference."""
    vis, aud, prop = window_arrays(window, cfg, dtype=params.dtype)
    raw = forward_window(params, cfg, vis, aud, prop).data[0]
    action = raw_to_action(raw, cfg)
    diag = {"raw": raw.copy(), "grip_logit": float(raw[2]),
            "delta": action.delta.copy()}
    return action, diag


class PolicyRunner:
    """Rollout helper producing actions identical to act() while caching
    per-timestep embeddings.

    Audio/proprio embeddings depend on a single observation and are cached
    per step. Visual embeddings use the true 3-frame history, which equals
    the within-window stack everywhere except the two leftmost window
    positions; those are recomputed each call.
    """

    def __init__(self, params: ParamStore, cfg: PolicyConfig):
        self.params = params
        self.cfg = cfg
        self.reset()

    def reset(self) -> None:
        self._obs: list[Observation] = []
        self._z_true: list[np.ndarray] = []   # fused z with true frame stacks

    def _inputs_for(self, obs_idx: list[tuple[int, int, int]], singles: list[int]):
        cfg = self.cfg
        dt = self.params.dtype
        h, wd = cfg.image_hw
        n = len(singles)
        vis = np.empty((n, cfg.in_channels, h, wd), dtype=dt)
        for row, (idxs, j) in enumerate(zip(obs_idx, singles)):
            frames = [self._obs[k].visual for k in idxs]
            vis[row] = np.concatenate(
                [f.transpose(2, 0, 1) for f in frames], axis=0).astype(dt) / 255.0
        prop = np.stack([self._obs[j].proprio[: cfg.proprio_dim]
                         for j in singles]).astype(dt)
        if cfg.audio_input == "spectrogram":
            waves = np.stack([self._obs[j].audio_wave for j in singles]).astype(np.float64)
            aud = dsp.spectrogram(waves, cfg.spec_cfg).transpose(0, 2, 1).astype(dt)
        else:
            aud = np.array([[self._obs[j].audio_force] for j in singles], dtype=dt)
        return vis, aud, prop

    def _fused(self, vis, aud, prop) -> np.ndarray:
        cfg, params = self.cfg, self.params
        if cfg.ablate_vision:
            vis = np.zeros_like(vis)
        if cfg.ablate_audio:
            aud = np.zeros_like(aud)
        e_v = encode_visual(params, cfg, Tensor(vis))
        if cfg.audio_input == "spectrogram":
            e_s = encode_audio(params, cfg, Tensor(aud))
        else:
            e_s = Tensor(aud)
        return fuse_step(params, cfg, e_v, e_s, Tensor(prop)).data

    def act(self, obs: Observation) -> tuple[Action, dict]:
        cfg, params = self.cfg, self.params
        self._obs.append(obs)
        t = len(self._obs) - 1
        # True-stack z for the newest step (valid at window positions >= 2).
        idxs = [max(0, t - k) for k in range(cfg.eff_stack - 1, -1, -1)]
        self._z_true.append(self._fused(*self._inputs_for([idxs], [t]))[0])

        t_len = cfg.eff_window
        start = max(0, t - t_len + 1)
        window = list(range(start, t + 1))
        while len(window) < t_len:
            window.insert(0, start)
        # Left-edge positions stack within the window (repeat the first obs).
        n_fresh = min(2, t_len) if cfg.eff_stack > 1 else 0
        zs = []
        if n_fresh:
            fresh_idx = []
            for i in range(n_fresh):
                rel = [window[max(0, i - k)] for k in range(cfg.eff_stack - 1, -1, -1)]
                fresh_idx.append(rel)
            fresh = self._fused(*self._inputs_for(fresh_idx, window[:n_fresh]))
            zs.extend(fresh)
        for i in range(n_fresh, t_len):
            zs.append(self._z_true[window[i]])

        z = np.stack(zs).astype(params.dtype)
        h = np.zeros((1, cfg.joint_dim), dtype=params.dtype)
        c = np.zeros((1, cfg.joint_dim), dtype=params.dtype)
        for row in z:
            h, c = _lstm_numpy(row[None, :], h, c, params)
        x = h
        for i in range(len(cfg.head_hidden) + 1):
            x = x @ params[f"head/l{i}_w"].data + params[f"head/l{i}_b"].data
            if i < len(cfg.head_hidden):
                x = np.maximum(x, 0)
        raw = x[0]
        action = raw_to_action(raw, cfg)
        return action, {"raw": raw.copy(), "grip_logit": float(raw[2]),
                        "delta": action.delta.copy()}


def _lstm_numpy(x: np.ndarray, h: np.ndarray, c: np.ndarray, params: ParamStore):
    gates = x @ params["lstm/wx"].data + h @ params["lstm/wh"].data + params["lstm/b"].data
    d = h.shape[1]
    i = _sig(gates[:, :d])
    f = _sig(gates[:, d:2 * d])
    g = np.tanh(gates[:, 2 * d:3 * d])
    o = _sig(gates[:, 3 * d:])
    c_new = f * c + i * g
    return o * np.tanh(c_new), c_new


def _sig(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
