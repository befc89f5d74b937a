"""Adam optimizer with bias correction."""

import numpy as np

from ..errors import OptimizerError, ValidationError


class AdamState:
    """Per-parameter first/second moment accumulators plus hyperparameters."""

    def __init__(self, learning_rate=1e-4, beta1=0.9, beta2=0.999, epsilon=1e-8):
        if not (0.0 < beta1 < 1.0 and 0.0 < beta2 < 1.0):
            raise ValidationError("Adam betas must lie strictly in (0, 1)")
        if epsilon <= 0.0:
            raise ValidationError("Adam epsilon must be positive")
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)
        self.step_count = 0
        self.first_moment = {}
        self.second_moment = {}


def adam_step(params, state):
    """Apply one bias-corrected Adam update in place.

    `params` is an iterable of (name, Tensor); tensors whose `.grad` is None
    are treated as having zero gradient. Non-finite gradients raise
    OptimizerError naming the parameter.
    """
    pairs = list(params)
    state.step_count += 1
    t = state.step_count
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for name, p in pairs:
        g = p.grad
        if g is None:
            g = np.zeros_like(p.data)
        elif not np.isfinite(g).all():
            raise OptimizerError(f"non-finite gradient for parameter '{name}'")
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        state.first_moment[name] = m
        state.second_moment[name] = v
        p.data -= state.learning_rate * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
    return state


class Adam:
    """Convenience wrapper binding an AdamState to a fixed parameter list."""

    def __init__(self, named_params, learning_rate=1e-4, beta1=0.9, beta2=0.999,
                 epsilon=1e-8):
        self.named_params = list(named_params)
        self.state = AdamState(learning_rate, beta1, beta2, epsilon)

    def step(self):
        adam_step(self.named_params, self.state)

    def zero_grad(self):
        for _, p in self.named_params:
            p.grad = None
