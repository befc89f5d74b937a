"""Central finite-difference gradient checking.

The finite-difference estimate only ever calls the forward pass, so it is an
independent oracle for the backward implementations.
"""

import numpy as np

from .tensor import Tensor


def numerical_gradient(fn, tensors, index, h=1e-6):
    """Central-difference gradient of scalar fn(*tensors) w.r.t. tensors[index]."""
    target = tensors[index]
    grad = np.zeros_like(target.data)
    flat = target.data.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = float(fn(*tensors).data)
        flat[i] = orig - h
        lo = float(fn(*tensors).data)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * h)
    return grad


def gradcheck(fn, tensors, h=1e-6, rel_tol=1e-5):
    """Compare reverse-mode gradients of scalar fn(*tensors) against central
    finite differences. Returns the worst relative error; raises AssertionError
    beyond rel_tol."""
    tensors = [t if isinstance(t, Tensor) else Tensor(t) for t in tensors]
    for t in tensors:
        t.requires_grad = True
        t.grad = None
    out = fn(*tensors)
    if out.data.size != 1:
        raise ValueError("gradcheck expects fn to return a scalar tensor")
    out.backward()
    worst = 0.0
    for i, t in enumerate(tensors):
        analytic = t.grad if t.grad is not None else np.zeros_like(t.data)
        numeric = numerical_gradient(fn, tensors, i, h=h)
        denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
        err = 0.0 if denom == 0.0 else np.linalg.norm(analytic - numeric) / denom
        worst = max(worst, err)
        assert err < rel_tol, (
            f"gradient check failed for argument {i}: relative error {err:.3e}"
        )
    return worst
