from .config import ModelConfig, reference_config
from .shapes import devectorize_shape, vectorize_shape
from .vae import FCVAE, GraphVAE, ImageVAE
from .hybrid import HybridNet
from .baselines import FCVAEBaseline, PCABaseline, PCAShapeModel, UNet

_LOADERS = {
    "image-vae": ImageVAE,
    "graph-vae": GraphVAE,
    "fc-vae": FCVAE,
    "hybrid": HybridNet,
    "pca": PCABaseline,
    "fc-vae-baseline": FCVAEBaseline,
    "unet": UNet,
}


def load_model(path):
    """Load any model checkpoint, dispatching on its manifest's model key."""
    from ..autodiff import load_checkpoint
    from ..errors import ConfigError

    _, meta = load_checkpoint(path)
    kind = meta.get("model")
    if kind not in _LOADERS:
        raise ConfigError(f"checkpoint has unknown model kind {kind!r}")
    return _LOADERS[kind].load(path)


__all__ = [
    "ModelConfig", "reference_config",
    "devectorize_shape", "vectorize_shape",
    "FCVAE", "GraphVAE", "ImageVAE",
    "HybridNet",
    "FCVAEBaseline", "PCABaseline", "PCAShapeModel", "UNet",
    "load_model",
]
