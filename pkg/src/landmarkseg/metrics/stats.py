"""Paired statistics: the Wilcoxon signed-rank test and report aggregation.

The exact two-sided p-value enumerates all 2^n sign assignments of the ranked
absolute differences (n <= 20); larger samples use the normal approximation
with tie and continuity corrections.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateSampleError, DimensionError, PairingError

EXACT_ENUMERATION_LIMIT = 20


def _average_ranks(values):
    """Ranks (1-based) with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def wilcoxon_signed_rank(x, y):
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped before ranking. Returns (W, p) with
    W = min(W+, W-).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError(
            f"paired samples must be equal-length vectors, got {x.shape} and {y.shape}"
        )
    diff = x - y
    diff = diff[diff != 0.0]
    n = len(diff)
    if n == 0:
        raise DegenerateSampleError("all paired differences are zero")
    ranks = _average_ranks(np.abs(diff))
    w_plus = float(ranks[diff > 0].sum())
    w_minus = float(ranks[diff < 0].sum())
    statistic = min(w_plus, w_minus)
    if n <= EXACT_ENUMERATION_LIMIT:
        p = _exact_p(ranks, statistic)
    else:
        p = _normal_approximation_p(ranks, statistic)
    return statistic, p


def _exact_p(ranks, observed):
    """P(min(W+, W-) <= observed) over all 2^n equally likely sign vectors."""
    total = float(ranks.sum())
    # distribution of W+ via dynamic programming over achievable sums; ranks
    # may be half-integral under ties, so work in doubled units
    doubled = np.round(ranks * 2).astype(np.int64)
    counts = np.zeros(int(doubled.sum()) + 1)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:len(counts) - r]
        counts = counts + shifted
    sums = np.arange(len(counts)) / 2.0
    hits = counts[np.minimum(sums, total - sums) <= observed + 1e-12].sum()
    return float(hits / 2.0 ** len(ranks))


def _normal_approximation_p(ranks, statistic):
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    # tie correction: subtract sum(t^3 - t)/48 over tie groups
    _, tie_counts = np.unique(ranks, return_counts=True)
    variance -= float(((tie_counts ** 3 - tie_counts) / 48.0).sum())
    if variance <= 0:
        raise DegenerateSampleError("zero variance in signed-rank statistic")
    z = (statistic - mean + 0.5) / math.sqrt(variance)
    p = 2.0 * 0.5 * math.erfc(-z / math.sqrt(2.0))
    return float(min(1.0, p))


def tukey_quartiles(values):
    """(q1, median, q3) with hinges as medians of the inclusive halves."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    n = len(values)
    if n == 0:
        raise DegenerateSampleError("no values to summarize")

    def median(v):
        m = len(v)
        return float(0.5 * (v[(m - 1) // 2] + v[m // 2]))

    half = (n + 1) // 2
    return median(values[:half]), median(values), median(values[n - half:])


@dataclass
class ExperimentRecord:
    """Per-sample metric bundle for one model."""

    sample_id: str
    mse_px2: float = None
    hausdorff_mm: float = None
    dice_per_class: list = None

    def metric(self, name):
        if name == "dice_mean":
            if not self.dice_per_class:
                return None
            return float(np.mean(self.dice_per_class))
        return getattr(self, name)


@dataclass
class ReportSummary:
    rows: list = field(default_factory=list)       # (model, metric, mean, median, q1, q3)
    p_matrices: dict = field(default_factory=dict)  # metric -> {(a, b): p or flag}
    models: list = field(default_factory=list)
    metrics: list = field(default_factory=list)


def aggregate_report(records_by_model, metrics=("mse_px2", "hausdorff_mm", "dice_mean")):
    """Summaries plus a pairwise Wilcoxon p-value matrix per metric.

    `records_by_model` maps model name to a list of ExperimentRecords; sample
    ids must pair up exactly across models.
    """
    models = list(records_by_model)
    if not models:
        raise PairingError("no model records to aggregate")
    id_lists = {m: [r.sample_id for r in records_by_model[m]] for m in models}
    reference_ids = id_lists[models[0]]
    for m in models[1:]:
        if sorted(id_lists[m]) != sorted(reference_ids):
            raise PairingError(
                f"sample ids of model {m!r} do not match model {models[0]!r}"
            )
    by_id = {m: {r.sample_id: r for r in records_by_model[m]} for m in models}
    summary = ReportSummary(models=models, metrics=[])
    for metric in metrics:
        values = {
            m: np.array([by_id[m][sid].metric(metric) for sid in reference_ids],
                        dtype=object)
            for m in models
        }
        if any(v is None for m in models for v in values[m]):
            continue
        summary.metrics.append(metric)
        numeric = {m: values[m].astype(np.float64) for m in models}
        for m in models:
            q1, med, q3 = tukey_quartiles(numeric[m])
            summary.rows.append(
                (m, metric, float(numeric[m].mean()), med, q1, q3))
        matrix = {}
        for a in models:
            for b in models:
                if a == b:
                    matrix[(a, b)] = ""
                    continue
                try:
                    _, p = wilcoxon_signed_rank(numeric[a], numeric[b])
                    matrix[(a, b)] = p
                except DegenerateSampleError:
                    matrix[(a, b)] = "degenerate"
        summary.p_matrices[metric] = matrix
    return summary
