"""Deterministic train/validation/test splitting."""

import numpy as np

from ..errors import ValidationError


def split_indices(n, seed):
    """Disjoint covering index split of sizes floor(0.7n), floor(0.1n), rest."""
    if n < 10:
        raise ValidationError(f"dataset too small to split: {n} < 10")
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(0.7 * n))
    n_val = int(np.floor(0.1 * n))
    return (order[:n_train], order[n_train:n_train + n_val],
            order[n_train + n_val:])


def split_dataset(dataset, seed):
    """70/10/20 split of a SyntheticDataset (or plain sample list)."""
    samples = dataset.samples if hasattr(dataset, "samples") else list(dataset)
    train_idx, val_idx, test_idx = split_indices(len(samples), seed)
    parts = tuple([samples[i] for i in idx]
                  for idx in (train_idx, val_idx, test_idx))
    if hasattr(dataset, "subset"):
        return tuple(dataset.subset(p) for p in parts)
    return parts
