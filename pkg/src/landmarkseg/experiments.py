"""Benchmark protocols: clean landmark segmentation, landmark extraction from
dense masks, and the occlusion robustness sweep.

Each protocol writes per-sample records, a summary with Tukey quartiles, and
pairwise Wilcoxon p-value matrices as CSV; figures are self-contained SVG.
"""

import csv
from pathlib import Path

import numpy as np

from .data.occlusion import occlude, sample_occlusion_box
from .data.raster import mask_boundary_segments, paint_labels
from .metrics.segmentation import dice, hausdorff, landmark_mse
from .metrics.stats import ExperimentRecord, aggregate_report
from .report.svg import line_plot, overlay_plot

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e")


def mask_input_images(dataset):
    """Label masks rendered as normalized grayscale model inputs."""
    scale = float(dataset.num_classes - 1)
    return dataset.masks().astype(np.float64)[:, None, :, :] / scale


def organ_contours(coords, organ_ranges):
    """Per-organ closed contours (normalized coordinates)."""
    return [np.asarray(coords[start:start + count])
            for _, start, count, _ in organ_ranges]


def landmark_label_mask(coords, organ_ranges, image_size):
    """Rasterize predicted landmark cycles into a dense label map."""
    contours = [c * image_size for c in organ_contours(coords, organ_ranges)]
    class_ids = [class_id for _, _, _, class_id in organ_ranges]
    return paint_labels(contours, class_ids, image_size, image_size)


def contour_point_cloud(coords, organ_ranges, image_size, max_step=0.5):
    """Densified union of all organ contours, in pixel coordinates."""
    from .metrics.segmentation import densify_contour

    pieces = [densify_contour(c * image_size, max_step=max_step, closed=True)
              for c in organ_contours(coords, organ_ranges)]
    return np.concatenate(pieces, axis=0)


def landmark_record(sample_id, pred, gt, organ_ranges, image_size,
                    spacing_mm_per_px=1.0):
    """Landmark MSE (px^2) and densified-contour Hausdorff (mm)."""
    mse = landmark_mse(pred, gt, image_size)
    hd = hausdorff(
        contour_point_cloud(pred, organ_ranges, image_size),
        contour_point_cloud(gt, organ_ranges, image_size),
        spacing_mm_per_px,
    )
    return ExperimentRecord(sample_id=sample_id, mse_px2=mse, hausdorff_mm=hd)


def mask_hausdorff(pred_mask, gt_mask, class_ids, spacing_mm_per_px=1.0):
    """Mean over classes of the boundary Hausdorff distance between label
    masks; an empty prediction for a non-empty class scores the image
    diagonal (maximal penalty)."""
    height, width = np.asarray(gt_mask).shape
    diagonal = float(np.hypot(height, width))
    values = []
    for class_id in class_ids:
        pred_pts = _boundary_points(pred_mask, class_id)
        gt_pts = _boundary_points(gt_mask, class_id)
        if len(pred_pts) == 0 and len(gt_pts) == 0:
            values.append(0.0)
        elif len(pred_pts) == 0 or len(gt_pts) == 0:
            values.append(diagonal * spacing_mm_per_px)
        else:
            values.append(hausdorff(pred_pts, gt_pts, spacing_mm_per_px))
    return float(np.mean(values))


def _boundary_points(mask, class_id):
    segments = mask_boundary_segments(np.asarray(mask) == class_id)
    if segments.size == 0:
        return np.zeros((0, 2))
    return segments.mean(axis=1)  # midpoints of the interface segments


def dice_per_class(pred_mask, gt_mask, num_classes):
    return [dice(pred_mask, gt_mask, c) for c in range(1, num_classes)]


# -- CSV helpers --------------------------------------------------------------


def write_records_csv(path, records_by_model, extra_cols=()):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "sample_id", "mse_px2", "hausdorff_mm",
                         "dice_mean", *extra_cols])
        for model in records_by_model:
            for rec in records_by_model[model]:
                writer.writerow([
                    model, rec.sample_id,
                    _fmt(rec.mse_px2), _fmt(rec.hausdorff_mm),
                    _fmt(rec.metric("dice_mean")),
                ])


def write_summary_csv(path, summary):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "metric", "mean", "median", "q1", "q3"])
        for model, metric, mean, median, q1, q3 in summary.rows:
            writer.writerow([model, metric, _fmt(mean), _fmt(median),
                             _fmt(q1), _fmt(q3)])


def write_p_matrix_csv(path, models, matrix):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", *models])
        for a in models:
            writer.writerow([a] + [_fmt(matrix[(a, b)]) for b in models])


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return repr(float(value))


# -- protocols -----------------------------------------------------------------


def run_landmark_benchmark(predictors, dataset, out_dir, spacing_mm_per_px=1.0,
                           overlays=6, inputs=None, write_landmark_files=False):
    """Evaluate landmark predictors on a dataset (Experiments 1 and 2).

    predictors: mapping name -> fitted estimator with .predict(images).
    `inputs` overrides the model input images (used for mask-input mode).
    Returns (records_by_model, summary).
    """
    from .data.io import save_landmarks

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    originals = dataset.images()
    images = inputs if inputs is not None else originals
    gt = dataset.landmarks()
    size = dataset.image_size
    records = {}
    for name, predictor in predictors.items():
        preds = predictor.predict(images)
        rows = []
        for i, sample in enumerate(dataset.samples):
            rows.append(landmark_record(
                sample.sample_id, preds[i], gt[i], dataset.organ_ranges,
                size, spacing_mm_per_px))
        records[name] = rows
        if write_landmark_files:
            lm_dir = out_dir / "landmarks"
            lm_dir.mkdir(exist_ok=True)
            for i, sample in enumerate(dataset.samples):
                save_landmarks(lm_dir / f"{name}_{sample.sample_id}.txt",
                               preds[i], dataset.organ_ranges)
        for i in range(min(overlays, len(dataset.samples))):
            sample = dataset.samples[i]
            contours = [(c, PALETTE[1]) for c in
                        organ_contours(gt[i], dataset.organ_ranges)]
            contours += [(c, PALETTE[0]) for c in
                         organ_contours(preds[i], dataset.organ_ranges)]
            overlay_plot(out_dir / f"overlay_{name}_{sample.sample_id}.svg",
                         originals[i], contours)
    summary = aggregate_report(records, metrics=("mse_px2", "hausdorff_mm"))
    write_records_csv(out_dir / "records.csv", records)
    write_summary_csv(out_dir / "summary.csv", summary)
    for metric in summary.metrics:
        write_p_matrix_csv(out_dir / f"pvalues_{metric}.csv", summary.models,
                           summary.p_matrices[metric])
    return records, summary


def run_occlusion_sweep(dual_model, unet_model, dataset, box_fractions, seed,
                        out_dir, spacing_mm_per_px=1.0):
    """Experiment 3: metric-versus-box-size curves under black-box occlusion.

    The dual model contributes its graph branch (landmark metrics plus the
    Dice/HD of the rasterized landmark mask) and its dense decoder head; the
    UNet contributes dense predictions. Box placement is seed-deterministic
    per (sample, size).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    size = dataset.image_size
    num_classes = dataset.num_classes
    class_ids = list(range(1, num_classes))
    images = dataset.images()
    gt_coords = dataset.landmarks()
    gt_masks = dataset.masks()
    rows = []
    curve_points = {}
    sides = sorted({int(round(frac * size)) for frac in box_fractions})
    for side in sides:
        occluded = np.empty_like(images)
        for i in range(len(images)):
            rng = np.random.default_rng([seed, side, i])
            box = sample_occlusion_box(images[i].shape, side, rng)
            occluded[i] = occlude(images[i], box)
        branch_masks = {}
        dual_coords = dual_model.predict(occluded)
        branch_masks["dual/landmark-raster"] = np.stack([
            landmark_label_mask(dual_coords[i], dataset.organ_ranges, size)
            for i in range(len(images))])
        branch_masks["dual/dense"] = dual_model.predict_dense(occluded).argmax(axis=1)
        branch_masks["unet/dense"] = unet_model.predict(occluded)
        for branch, masks in branch_masks.items():
            dices = []
            hds = []
            for i, sample in enumerate(dataset.samples):
                per_class = dice_per_class(masks[i], gt_masks[i], num_classes)
                hd = mask_hausdorff(masks[i], gt_masks[i], class_ids,
                                    spacing_mm_per_px)
                mse = (landmark_mse(dual_coords[i], gt_coords[i], size)
                       if branch == "dual/landmark-raster" else None)
                rows.append([branch, side, sample.sample_id,
                             _fmt(mse), _fmt(float(np.mean(per_class))),
                             _fmt(hd)])
                dices.append(float(np.mean(per_class)))
                hds.append(hd)
            curve_points.setdefault(branch, []).append(
                (side, float(np.mean(dices)), float(np.mean(hds))))
    with open(out_dir / "occlusion_records.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["branch", "box_px", "sample_id", "mse_px2",
                         "dice_mean", "hausdorff_mm"])
        writer.writerows(rows)
    with open(out_dir / "occlusion_curves.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["branch", "box_px", "dice_mean", "hausdorff_mm"])
        for branch, points in curve_points.items():
            for side, d, h in points:
                writer.writerow([branch, side, _fmt(d), _fmt(h)])
    line_plot(out_dir / "dice_vs_box.svg",
              {branch: ([p[0] for p in points], [p[1] for p in points])
               for branch, points in curve_points.items()},
              x_label="occlusion box side (px)", y_label="mean Dice",
              title="Dice under occlusion")
    return curve_points
