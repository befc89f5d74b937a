from .tensor import (
    Tensor,
    add,
    as_tensor,
    clamp_min,
    concat_rows,
    conv2d,
    exp,
    log,
    matmul,
    maxpool2d,
    mul,
    power,
    relu,
    reshape,
    softmax,
    square,
    tensor_mean,
    tensor_sum,
    upsample2x,
)
from .optim import Adam, AdamState, adam_step
from .gradcheck import gradcheck, numerical_gradient
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Tensor", "add", "as_tensor", "clamp_min", "concat_rows", "conv2d", "exp",
    "log", "matmul", "maxpool2d", "mul", "power", "relu", "reshape", "softmax",
    "square", "tensor_mean", "tensor_sum", "upsample2x",
    "Adam", "AdamState", "adam_step",
    "gradcheck", "numerical_gradient",
    "load_checkpoint", "save_checkpoint",
]
