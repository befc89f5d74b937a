"""Landmark-based anatomical segmentation with hybrid image/graph networks.

The package couples a convolutional image encoder with a spectral
graph-convolutional decoder to predict landmark graphs directly from images,
alongside PCA, fully connected VAE, and UNet baselines, a synthetic paired
dataset generator, evaluation metrics, and a CLI harness for the benchmark
protocols.
"""

from .models import (
    FCVAE,
    FCVAEBaseline,
    GraphVAE,
    HybridNet,
    ImageVAE,
    ModelConfig,
    PCABaseline,
    PCAShapeModel,
    UNet,
    load_model,
)
from .graph import Graph
from .data import SyntheticShapeSpec, generate_dataset, split_dataset

__version__ = "0.1.0"

__all__ = [
    "FCVAE", "FCVAEBaseline", "GraphVAE", "HybridNet", "ImageVAE",
    "ModelConfig", "PCABaseline", "PCAShapeModel", "UNet", "load_model",
    "Graph", "SyntheticShapeSpec", "generate_dataset", "split_dataset",
    "__version__",
]
