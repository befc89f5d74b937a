import itertools

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from landmarkseg.errors import (
    DegenerateSampleError,
    DimensionError,
    MetricError,
    PairingError,
)
from landmarkseg.metrics import (
    ExperimentRecord,
    aggregate_report,
    contour_hausdorff,
    densify_contour,
    dice,
    hausdorff,
    landmark_mse,
    tukey_quartiles,
    wilcoxon_signed_rank,
)
from landmarkseg.nn import mse_loss
from landmarkseg.autodiff import Tensor


class TestLandmarkMse:
    def test_zero_for_equal(self, rng):
        coords = rng.random((7, 2))
        assert landmark_mse(coords, coords, 64) == 0.0

    def test_uniform_shift(self):
        pred = np.zeros((5, 2))
        gt = pred + np.array([3.0 / 64, 4.0 / 64])
        assert np.isclose(landmark_mse(pred, gt, 64), 12.5)

    def test_equals_mse_loss_on_pixel_tensors(self, rng):
        pred = rng.random((6, 2))
        gt = rng.random((6, 2))
        via_loss = mse_loss(Tensor(pred * 32), Tensor(gt * 32)).item()
        assert np.isclose(landmark_mse(pred, gt, 32), via_loss)

    def test_quadratic_in_image_size(self, rng):
        pred = rng.random((6, 2))
        gt = rng.random((6, 2))
        assert np.isclose(landmark_mse(pred, gt, 128),
                          4.0 * landmark_mse(pred, gt, 64))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            landmark_mse(np.zeros((3, 2)), np.zeros((4, 2)), 64)


class TestHausdorff:
    def test_identical_contours(self, rng):
        pts = rng.random((8, 2))
        assert hausdorff(pts, pts.copy()) == 0.0

    def test_parallel_segments(self):
        assert hausdorff([(0, 0), (10, 0)], [(0, 5), (10, 5)], 1.0) == 5.0

    def test_spacing_scale(self):
        assert np.isclose(hausdorff([(0, 0)], [(3, 4)], 0.175), 0.875)

    def test_empty_set_raises(self):
        with pytest.raises(MetricError):
            hausdorff(np.zeros((0, 2)), [(1, 1)])

    def test_metric_properties_on_random_triples(self, rng):
        for _ in range(15):
            a = rng.random((5, 2)) * 10
            b = rng.random((6, 2)) * 10
            c = rng.random((4, 2)) * 10
            ab, ba = hausdorff(a, b), hausdorff(b, a)
            assert np.isclose(ab, ba, atol=1e-9)
            assert hausdorff(a, c) <= ab + hausdorff(b, c) + 1e-9

    def test_densified_contour_measures_edges(self):
        # vertex sets far apart along edges but contours geometrically close
        square = np.array([(0, 0), (10, 0), (10, 10), (0, 10)], dtype=float)
        rotated = np.array([(5, 0), (10, 5), (5, 10), (0, 5)], dtype=float)
        vertex_only = hausdorff(square, rotated)
        densified = contour_hausdorff(square, rotated)
        assert densified <= vertex_only
        steps = densify_contour(square, max_step=0.5)
        gaps = np.linalg.norm(np.diff(np.vstack([steps, steps[:1]]), axis=0), axis=1)
        assert gaps.max() <= 0.5 + 1e-12


class TestDice:
    def test_identical(self, rng):
        mask = rng.integers(0, 3, (6, 6))
        assert dice(mask, mask, 1) == 1.0

    def test_disjoint(self):
        a = np.zeros((4, 4), int)
        b = np.zeros((4, 4), int)
        a[0, 0] = 1
        b[3, 3] = 1
        assert dice(a, b, 1) == 0.0

    def test_half_overlap(self):
        a = np.zeros((4, 4), int)
        b = np.zeros((4, 4), int)
        a[0, :2] = 1
        b[0, 1:3] = 1
        assert dice(a, b, 1) == 0.5

    def test_both_empty_is_one(self):
        assert dice(np.zeros((3, 3), int), np.zeros((3, 3), int), 2) == 1.0

    @given(st.integers(0, 2 ** 16 - 1), st.integers(0, 2 ** 16 - 1))
    @settings(max_examples=30, deadline=None)
    def test_symmetry(self, seed_a, seed_b):
        a = np.random.default_rng(seed_a).integers(0, 3, (5, 5))
        b = np.random.default_rng(seed_b).integers(0, 3, (5, 5))
        assert dice(a, b, 1) == dice(b, a, 1)


def enumeration_oracle(x, y):
    """Literal 2^n sign enumeration using scipy's independent ranking."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    d = d[d != 0]
    ranks = scipy.stats.rankdata(np.abs(d))
    total = ranks.sum()
    observed = min(ranks[d > 0].sum(), ranks[d < 0].sum())
    hits = 0
    for signs in itertools.product((1, -1), repeat=len(d)):
        w_plus = sum(r for r, s in zip(ranks, signs) if s > 0)
        if min(w_plus, total - w_plus) <= observed + 1e-12:
            hits += 1
    return observed, hits / 2.0 ** len(d)


class TestWilcoxon:
    def test_five_positive_distinct(self):
        x = np.array([2.0, 4.0, 6.0, 8.0, 10.0])
        y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        w, p = wilcoxon_signed_rank(x, y)
        assert w == 0.0
        assert np.isclose(p, 2.0 / 32.0)

    def test_identical_samples_degenerate(self, rng):
        x = rng.random(8)
        with pytest.raises(DegenerateSampleError):
            wilcoxon_signed_rank(x, x.copy())

    def test_antisymmetry(self, rng):
        x = rng.random(11)
        y = rng.random(11)
        assert wilcoxon_signed_rank(x, y) == wilcoxon_signed_rank(y, x)

    def test_matches_enumeration_oracle(self, rng):
        checked = 0
        for _ in range(100):
            n = int(rng.integers(1, 13))
            x = np.round(rng.normal(size=n), 1)
            y = np.round(rng.normal(size=n), 1)
            if not np.any(x - y):
                continue
            w_ref, p_ref = enumeration_oracle(x, y)
            w, p = wilcoxon_signed_rank(x, y)
            assert w == w_ref
            assert np.isclose(p, p_ref, atol=1e-12)
            checked += 1
        assert checked >= 80

    def test_matches_scipy_exact_when_tie_free(self, rng):
        for _ in range(20):
            n = int(rng.integers(6, 15))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            _, p = wilcoxon_signed_rank(x, y)
            ref = scipy.stats.wilcoxon(x, y, mode="exact").pvalue
            assert np.isclose(p, ref, atol=1e-12)

    def test_large_sample_normal_approximation(self, rng):
        x = rng.normal(size=60)
        y = x + rng.normal(0.4, 1.0, size=60)
        _, p = wilcoxon_signed_rank(x, y)
        ref = scipy.stats.wilcoxon(x, y, correction=True,
                                   mode="approx").pvalue
        assert np.isclose(p, ref, rtol=1e-6)


class TestAggregateReport:
    def test_quartiles_convention(self):
        assert tukey_quartiles([1, 2, 3, 4, 5]) == (2.0, 3.0, 4.0)

    def test_single_record(self):
        records = {"m": [ExperimentRecord("s0", mse_px2=2.0, hausdorff_mm=1.0)]}
        summary = aggregate_report(records, metrics=("mse_px2",))
        model, metric, mean, median, q1, q3 = summary.rows[0]
        assert mean == median == 2.0

    def test_identical_models_flagged_degenerate(self):
        recs = [ExperimentRecord(f"s{i}", mse_px2=float(i), hausdorff_mm=1.0)
                for i in range(5)]
        summary = aggregate_report({"a": recs, "b": list(recs)},
                                   metrics=("mse_px2",))
        matrix = summary.p_matrices["mse_px2"]
        assert matrix[("a", "a")] == ""
        assert matrix[("a", "b")] == "degenerate"

    def test_mismatched_ids_raise_pairing_error(self):
        a = [ExperimentRecord("s0", mse_px2=1.0)]
        b = [ExperimentRecord("s1", mse_px2=1.0)]
        with pytest.raises(PairingError):
            aggregate_report({"a": a, "b": b}, metrics=("mse_px2",))

    def test_p_values_paired_by_sample_id(self, rng):
        ids = [f"s{i}" for i in range(12)]
        base = rng.random(12)
        a = [ExperimentRecord(i, mse_px2=v) for i, v in zip(ids, base)]
        b = [ExperimentRecord(i, mse_px2=v + 0.5)
             for i, v in zip(reversed(ids), base[::-1])]
        summary = aggregate_report({"a": a, "b": b}, metrics=("mse_px2",))
        _, p_ref = wilcoxon_signed_rank(base, base + 0.5)
        assert np.isclose(summary.p_matrices["mse_px2"][("a", "b")], p_ref)
