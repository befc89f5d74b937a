"""Parameter-holding layers built on the autodiff engine."""

import numpy as np

from ..autodiff import Tensor, add, conv2d, matmul, relu
from ..errors import DimensionError


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=shape), requires_grad=True)


class Linear:
    def __init__(self, f_in, f_out, rng):
        self.weight = glorot_uniform(rng, (f_in, f_out), f_in, f_out)
        self.bias = Tensor(np.zeros(f_out), requires_grad=True)
        self.f_in = f_in
        self.f_out = f_out

    def forward(self, x):
        return add(matmul(x, self.weight), self.bias)

    def named_parameters(self, prefix=""):
        yield f"{prefix}weight", self.weight
        yield f"{prefix}bias", self.bias


class Conv2d:
    """Odd-kernel, unit-stride, same-padding convolution layer."""

    def __init__(self, c_in, c_out, kernel_size, rng):
        k = kernel_size
        fan_in = c_in * k * k
        fan_out = c_out * k * k
        self.weight = glorot_uniform(rng, (c_out, c_in, k, k), fan_in, fan_out)
        self.bias = Tensor(np.zeros(c_out), requires_grad=True)
        self.c_in = c_in
        self.c_out = c_out

    def forward(self, x):
        return conv2d(x, self.weight, self.bias)

    def named_parameters(self, prefix=""):
        yield f"{prefix}weight", self.weight
        yield f"{prefix}bias", self.bias


class ResidualBlock:
    """conv3x3 -> ReLU -> conv3x3 with an additive shortcut and a trailing ReLU.

    The shortcut is the identity when channel counts match and a 1x1
    projection otherwise. Spatial size is always preserved.
    """

    def __init__(self, c_in, c_out, rng):
        self.conv1 = Conv2d(c_in, c_out, 3, rng)
        self.conv2 = Conv2d(c_out, c_out, 3, rng)
        self.projection = Conv2d(c_in, c_out, 1, rng) if c_in != c_out else None
        self.c_in = c_in
        self.c_out = c_out

    def forward(self, x):
        if x.shape[-3] != self.c_in:
            raise DimensionError(
                f"residual block expects {self.c_in} channels, got {x.shape[-3]}"
            )
        branch = self.conv2.forward(relu(self.conv1.forward(x)))
        shortcut = x if self.projection is None else self.projection.forward(x)
        return relu(add(branch, shortcut))

    def named_parameters(self, prefix=""):
        yield from self.conv1.named_parameters(prefix + "conv1.")
        yield from self.conv2.named_parameters(prefix + "conv2.")
        if self.projection is not None:
            yield from self.projection.named_parameters(prefix + "projection.")
