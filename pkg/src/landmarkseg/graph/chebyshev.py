"""Chebyshev-filtered spectral graph convolution.

The filter response is a truncated Chebyshev expansion on the rescaled
Laplacian; evaluation uses the three-term recursion on node signals, so the
dense polynomial matrices are never formed.
"""

import numpy as np

from ..autodiff import Tensor, add, as_tensor, matmul, mul
from ..errors import DimensionError, ValidationError
from .spectral import lambda_max, scaled_laplacian
from .structure import laplacian


class ChebFilter:
    """Per-term weight matrices and a bias for one spectral convolution."""

    def __init__(self, weights, bias):
        self.weights = [as_tensor(w) for w in weights]
        if not self.weights:
            raise ValidationError("ChebFilter needs at least one term")
        f_in, f_out = self.weights[0].shape
        for w in self.weights:
            if w.shape != (f_in, f_out):
                raise ValidationError("all Chebyshev weight matrices must share one shape")
        self.bias = as_tensor(bias)
        if self.bias.shape != (f_out,):
            raise ValidationError(f"bias must have shape ({f_out},)")
        self.f_in = f_in
        self.f_out = f_out

    @property
    def num_terms(self):
        return len(self.weights)

    @classmethod
    def init(cls, num_terms, f_in, f_out, rng):
        if num_terms < 1:
            raise ValidationError("num_terms must be >= 1")
        limit = np.sqrt(6.0 / (f_in * num_terms + f_out))
        weights = [
            Tensor(rng.uniform(-limit, limit, size=(f_in, f_out)), requires_grad=True)
            for _ in range(num_terms)
        ]
        bias = Tensor(np.zeros(f_out), requires_grad=True)
        return cls(weights, bias)

    def named_parameters(self, prefix=""):
        for k, w in enumerate(self.weights):
            yield f"{prefix}theta{k}", w
        yield f"{prefix}bias", self.bias


def cheb_conv(x, lap_scaled, filt):
    """Spectral convolution sum_k T_k(L_scaled) X W_k + bias.

    `x` is (num_nodes, F_in) or batched (N, num_nodes, F_in); `lap_scaled` is
    the rescaled Laplacian as a plain array or constant Tensor.
    """
    x = as_tensor(x)
    lap_t = as_tensor(lap_scaled)
    n_nodes = lap_t.shape[0]
    if x.shape[-2] != n_nodes:
        raise DimensionError(
            f"signal has {x.shape[-2]} node rows, Laplacian expects {n_nodes}"
        )
    if x.shape[-1] != filt.f_in:
        raise DimensionError(
            f"signal has {x.shape[-1]} features, filter expects {filt.f_in}"
        )
    t_prev = x  # T_0 X
    out = matmul(t_prev, filt.weights[0])
    if filt.num_terms > 1:
        t_curr = matmul(lap_t, t_prev)  # T_1 X
        out = add(out, matmul(t_curr, filt.weights[1]))
        for k in range(2, filt.num_terms):
            t_next = add(mul(matmul(lap_t, t_curr), 2.0), mul(t_prev, -1.0))
            out = add(out, matmul(t_next, filt.weights[k]))
            t_prev, t_curr = t_curr, t_next
    return add(out, filt.bias)


def scaled_laplacian_for(graph, kind="symmetric-normalized", tol=1e-9):
    """Laplacian of `graph`, rescaled to [-1, 1] for the Chebyshev basis.

    Computed once per graph; the result is immutable and shared by every
    convolution layer operating on the same connectivity.
    """
    lap = laplacian(graph, kind=kind)
    return scaled_laplacian(lap, lambda_max(lap, tol=tol))
