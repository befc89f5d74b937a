"""Loss functions: landmark/image MSE, Gaussian KL, soft Dice, cross-entropy.

All losses accept single samples or a leading batch dimension and reduce to a
scalar Tensor (mean over the batch).
"""

import numpy as np

from ..autodiff import (
    Tensor,
    as_tensor,
    clamp_min,
    exp,
    log,
    mul,
    square,
    tensor_sum,
)
from ..errors import DimensionError, ValidationError

DICE_SMOOTHING = 1e-6
PROBABILITY_FLOOR = 1e-12


def mse_loss(pred, target):
    """Mean over all elements of squared differences."""
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape:
        raise DimensionError(f"mse_loss shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    return mul(tensor_sum(square(diff)), 1.0 / pred.size)


def kl_loss(mu, log_var):
    """KL divergence of N(mu, exp(log_var)) from the unit Gaussian prior:
    0.5 * sum_dims(mu^2 + exp(log_var) - 1 - log_var), averaged over the batch."""
    mu, log_var = as_tensor(mu), as_tensor(log_var)
    if mu.shape != log_var.shape:
        raise DimensionError(f"kl_loss shape mismatch: {mu.shape} vs {log_var.shape}")
    batch = mu.shape[0] if mu.ndim > 1 else 1
    per_dim = square(mu) + exp(log_var) + mul(log_var, -1.0) + (-1.0)
    return mul(tensor_sum(per_dim), 0.5 / batch)


def _as_class_maps(t, what):
    # (C,H,W) -> (1,C,H,W)
    t = as_tensor(t)
    if t.ndim == 3:
        return t, True
    if t.ndim == 4:
        return t, False
    raise DimensionError(f"{what} must be C×H×W or N×C×H×W, got shape {t.shape}")


def soft_dice_loss(probs, onehot):
    """1 - mean foreground-class soft Dice overlap.

    `probs` is a channelwise softmax output; `onehot` the one-hot ground
    truth. Channel 0 is background and excluded from the mean.
    """
    probs, single = _as_class_maps(probs, "probs")
    onehot, _ = _as_class_maps(onehot, "onehot")
    if probs.shape != onehot.shape:
        raise DimensionError(f"soft_dice_loss shape mismatch: {probs.shape} vs {onehot.shape}")
    if probs.data.min() < -1e-9 or probs.data.max() > 1.0 + 1e-9:
        raise ValidationError("soft_dice_loss expects probabilities in [0, 1]")
    if single:
        probs = probs.reshape((1,) + probs.shape)
        onehot = onehot.reshape((1,) + onehot.shape)
    n, c = probs.shape[0], probs.shape[1]
    if c < 2:
        raise DimensionError("soft_dice_loss needs at least one foreground class")
    inter = tensor_sum(mul(probs, onehot), axis=(2, 3))  # (N, C)
    totals = tensor_sum(probs, axis=(2, 3)) + tensor_sum(onehot, axis=(2, 3))
    dice = (mul(inter, 2.0) + DICE_SMOOTHING) / (totals + DICE_SMOOTHING)
    fg = mul(dice, _foreground_mask(n, c))
    return 1.0 - mul(tensor_sum(fg), 1.0 / (n * (c - 1)))


def _foreground_mask(n, c):
    m = np.ones((n, c))
    m[:, 0] = 0.0
    return Tensor(m)


def cross_entropy_loss(probs, labels):
    """Mean over pixels of -log p[label], probabilities floored at 1e-12."""
    probs, single = _as_class_maps(probs, "probs")
    labels = np.asarray(getattr(labels, "data", labels))
    if single:
        probs = probs.reshape((1,) + probs.shape)
        labels = labels[None] if labels.ndim == 2 else labels
    n, c, h, w = probs.shape
    if labels.shape != (n, h, w):
        raise DimensionError(
            f"labels shape {labels.shape} does not match probability maps {(n, h, w)}"
        )
    labels = labels.astype(np.int64)
    if labels.min() < 0 or labels.max() >= c:
        raise ValidationError(f"labels must lie in [0, {c - 1}]")
    onehot = np.zeros((n, c, h, w))
    np.put_along_axis(onehot, labels[:, None], 1.0, axis=1)
    picked = tensor_sum(mul(probs, Tensor(onehot)), axis=1)  # (N, H, W)
    nll = mul(log(clamp_min(picked, PROBABILITY_FLOOR)), -1.0)
    return mul(tensor_sum(nll), 1.0 / (n * h * w))


def segmentation_loss(probs, labels, onehot=None):
    """Average of soft Dice and cross-entropy on a dense prediction."""
    labels_arr = np.asarray(getattr(labels, "data", labels)).astype(np.int64)
    if onehot is None:
        probs_ndim = probs.ndim if hasattr(probs, "ndim") else np.asarray(probs).ndim
        c = probs.shape[0] if probs_ndim == 3 else probs.shape[1]
        la = labels_arr if labels_arr.ndim == 3 else labels_arr[None]
        oh = np.zeros((la.shape[0], c) + la.shape[1:])
        np.put_along_axis(oh, la[:, None], 1.0, axis=1)
        onehot = oh if labels_arr.ndim == 3 else oh[0]
    dice = soft_dice_loss(probs, onehot)
    ce = cross_entropy_loss(probs, labels_arr)
    return mul(dice + ce, 0.5)
