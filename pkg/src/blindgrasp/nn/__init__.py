"""Minimal reverse-mode autodiff, optimizer, checkpointing, augmentation."""

from .augment import augment_images
from .checkpoint import load_params, load_tensors, save_params, save_tensors
from .optim import ParamStore, adam_step
from .tensor import (
    Tensor,
    add,
    as_tensor,
    concat,
    conv1d,
    conv2d,
    lstm_cell,
    matmul,
    mean,
    mse_loss,
    mul,
    relu,
    reshape,
    scale,
    sigmoid,
    split,
    sub,
    tanh,
)

__all__ = [
    "Tensor", "add", "as_tensor", "concat", "conv1d", "conv2d", "lstm_cell",
    "matmul", "mean", "mse_loss", "mul", "relu", "reshape", "scale",
    "sigmoid", "split", "sub", "tanh",
    "ParamStore", "adam_step",
    "save_tensors", "load_tensors", "save_params", "load_params",
    "augment_images",
]
