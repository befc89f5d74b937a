"""Vectorized landmark shapes: row-major interleaved (x0, y0, x1, y1, ...)."""

import numpy as np

from ..errors import DimensionError


def vectorize_shape(coords):
    """Flatten an (n_nodes, 2) coordinate matrix row-major; also accepts a
    Graph (its features) or a batch (n, n_nodes, 2)."""
    coords = np.asarray(getattr(coords, "features", coords), dtype=np.float64)
    if coords.ndim == 2:
        if coords.shape[1] != 2:
            raise DimensionError(f"expected 2-D coordinates, got shape {coords.shape}")
        return coords.reshape(-1)
    if coords.ndim == 3:
        if coords.shape[2] != 2:
            raise DimensionError(f"expected 2-D coordinates, got shape {coords.shape}")
        return coords.reshape(coords.shape[0], -1)
    raise DimensionError(f"cannot vectorize shape array of shape {coords.shape}")


def devectorize_shape(vector):
    """Inverse of vectorize_shape; accepts a single vector or a batch."""
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape[-1] % 2:
        raise DimensionError(
            f"vector length {vector.shape[-1]} is odd; cannot split into (x, y) pairs"
        )
    if vector.ndim == 1:
        return vector.reshape(-1, 2)
    if vector.ndim == 2:
        return vector.reshape(vector.shape[0], -1, 2)
    raise DimensionError(f"cannot devectorize array of shape {vector.shape}")
