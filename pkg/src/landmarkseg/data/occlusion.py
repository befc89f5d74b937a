"""Occlusion augmentation: black boxes pasted over images."""

import numpy as np


def occlude(image, box):
    """Zero the pixels inside box = (row, col, height, width), clipped to the
    image bounds. A zero-area box is the identity. Returns a new array."""
    image = np.asarray(image, dtype=np.float64)
    out = image.copy()
    row, col, h, w = (int(v) for v in box)
    if h <= 0 or w <= 0:
        return out
    r0 = max(0, row)
    c0 = max(0, col)
    r1 = min(image.shape[-2], row + h)
    c1 = min(image.shape[-1], col + w)
    if r0 < r1 and c0 < c1:
        out[..., r0:r1, c0:c1] = 0.0
    return out


def sample_occlusion_box(image_shape, side, rng):
    """Uniformly placed side×side box fully inside an (..., H, W) image."""
    h, w = image_shape[-2], image_shape[-1]
    side = int(side)
    if side <= 0:
        return (0, 0, 0, 0)
    side = min(side, h, w)
    row = int(rng.integers(0, h - side + 1))
    col = int(rng.integers(0, w - side + 1))
    return (row, col, side, side)
