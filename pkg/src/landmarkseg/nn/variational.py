"""Variational bottleneck utilities."""

from dataclasses import dataclass

from ..autodiff import Tensor, add, as_tensor, exp, mul
from ..errors import DimensionError


@dataclass
class LatentCode:
    """Posterior mean/log-variance plus the reparameterized sample."""

    mu: Tensor
    log_var: Tensor
    sample: Tensor


def reparameterize(mu, log_var, eps):
    """sample = mu + exp(0.5 * log_var) * eps, differentiable in mu and log_var."""
    mu, log_var, eps = as_tensor(mu), as_tensor(log_var), as_tensor(eps)
    if mu.shape != log_var.shape or mu.shape != eps.shape:
        raise DimensionError(
            f"reparameterize shape mismatch: {mu.shape}, {log_var.shape}, {eps.shape}"
        )
    return add(mu, mul(exp(mul(log_var, 0.5)), eps))


def latent_code(mu, log_var, eps):
    return LatentCode(mu=mu, log_var=log_var, sample=reparameterize(mu, log_var, eps))
