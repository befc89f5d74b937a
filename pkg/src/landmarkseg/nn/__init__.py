from .layers import Conv2d, Linear, ResidualBlock, glorot_uniform
from .losses import (
    cross_entropy_loss,
    kl_loss,
    mse_loss,
    segmentation_loss,
    soft_dice_loss,
)
from .variational import LatentCode, latent_code, reparameterize

__all__ = [
    "Conv2d", "Linear", "ResidualBlock", "glorot_uniform",
    "cross_entropy_loss", "kl_loss", "mse_loss", "segmentation_loss",
    "soft_dice_loss",
    "LatentCode", "latent_code", "reparameterize",
]
