"""Shared minibatch training loop."""

import numpy as np

from ..autodiff import Adam
from ..errors import NumericError


def iterate_batches(n, batch_size, rng=None):
    """Yield index arrays covering range(n); shuffled when rng is given."""
    order = np.arange(n) if rng is None else rng.permutation(n)
    for lo in range(0, n, batch_size):
        yield order[lo:lo + batch_size]


def run_training(named_params, n_samples, batch_loss, epochs, batch_size,
                 learning_rate, rng, beta1=0.9, beta2=0.999, epsilon=1e-8):
    """Generic Adam loop.

    `batch_loss(indices)` must return (total_loss_tensor, dict_of_term_floats).
    Returns (trace, initial_terms): `trace` has one dict per epoch with the
    sample-weighted mean of each loss term; `initial_terms` is the same
    average evaluated before any update.
    """
    named_params = list(named_params)
    optimizer = Adam(named_params, learning_rate=learning_rate,
                     beta1=beta1, beta2=beta2, epsilon=epsilon)

    def epoch_average(accumulator):
        return {k: v / n_samples for k, v in accumulator.items()}

    initial = {}
    for idx in iterate_batches(n_samples, batch_size):
        loss, terms = batch_loss(idx)
        _check_loss(loss, terms, epoch=0)
        for k, v in terms.items():
            initial[k] = initial.get(k, 0.0) + v * len(idx)
    initial_terms = epoch_average(initial)

    trace = []
    for epoch in range(1, epochs + 1):
        accum = {}
        for idx in iterate_batches(n_samples, batch_size, rng=rng):
            optimizer.zero_grad()
            loss, terms = batch_loss(idx)
            _check_loss(loss, terms, epoch)
            loss.backward()
            optimizer.step()
            for k, v in terms.items():
                accum[k] = accum.get(k, 0.0) + v * len(idx)
        row = epoch_average(accum)
        row["epoch"] = epoch
        trace.append(row)
    return trace, initial_terms


def _check_loss(loss, terms, epoch):
    value = float(loss.data)
    if not np.isfinite(value):
        raise NumericError(
            f"non-finite training loss at epoch {epoch}: terms={terms}"
        )
