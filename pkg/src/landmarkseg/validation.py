"""Input validation helpers shared by the estimator layer."""

import numpy as np

from .errors import DimensionError, ValidationError


def check_finite(x, name="input"):
    x = np.asarray(x)
    if not np.isfinite(x).all():
        raise ValidationError(f"{name} contains NaN/Inf")
    return x


def check_image_batch(x, image_size=None, name="X"):
    """Coerce to (n, 1, H, W) float64; accepts (n, H, W) or a single image."""
    x = check_finite(np.asarray(x, dtype=np.float64), name)
    if x.ndim == 2:
        x = x[None, None]
    elif x.ndim == 3:
        x = x[:, None]
    elif x.ndim != 4:
        raise DimensionError(f"{name} must be (n,H,W) or (n,1,H,W), got shape {x.shape}")
    if x.shape[1] != 1:
        raise DimensionError(f"{name} must have a single channel, got {x.shape[1]}")
    if image_size is not None and x.shape[2:] != (image_size, image_size):
        raise DimensionError(
            f"{name} spatial size {x.shape[2:]} does not match configured "
            f"{image_size}×{image_size}"
        )
    return x


def check_coords_batch(y, num_nodes=None, name="Y"):
    """Coerce to (n, num_nodes, 2) float64; accepts a single (num_nodes, 2)."""
    y = check_finite(np.asarray(y, dtype=np.float64), name)
    if y.ndim == 2:
        y = y[None]
    if y.ndim != 3 or y.shape[2] != 2:
        raise DimensionError(f"{name} must be (n, num_nodes, 2), got shape {y.shape}")
    if num_nodes is not None and y.shape[1] != num_nodes:
        raise DimensionError(
            f"{name} has {y.shape[1]} landmarks per sample, expected {num_nodes}"
        )
    return y


def check_label_batch(m, num_classes, name="masks"):
    """Coerce to (n, H, W) integer label maps and bounds-check the labels."""
    m = np.asarray(m)
    if m.ndim == 2:
        m = m[None]
    if m.ndim != 3:
        raise DimensionError(f"{name} must be (n, H, W), got shape {m.shape}")
    m = m.astype(np.int64)
    if m.size and (m.min() < 0 or m.max() >= num_classes):
        raise ValidationError(f"{name} labels must lie in [0, {num_classes - 1}]")
    return m


def check_matrix(x, name="X"):
    x = check_finite(np.asarray(x, dtype=np.float64), name)
    if x.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {x.shape}")
    return x
