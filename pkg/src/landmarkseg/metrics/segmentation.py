"""Evaluation metrics: landmark MSE in pixel space, contour Hausdorff distance
in millimeters, and the Dice overlap coefficient."""

import numpy as np

from ..errors import DimensionError, MetricError


def landmark_mse(pred, gt, image_size_px):
    """Mean squared error over all 2|V| coordinates, in pixel units."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise DimensionError(f"landmark shapes differ: {pred.shape} vs {gt.shape}")
    diff = (pred - gt) * float(image_size_px)
    return float(np.mean(diff ** 2))


def densify_contour(vertices, max_step=0.5, closed=True):
    """Resample a polyline so no edge segment exceeds max_step (pixel units)."""
    vertices = np.asarray(vertices, dtype=np.float64)
    if vertices.ndim != 2 or vertices.shape[1] != 2:
        raise DimensionError(f"contour must be (n, 2), got {vertices.shape}")
    if len(vertices) == 1:
        return vertices.copy()
    pts = []
    n = len(vertices)
    last = n if closed else n - 1
    for i in range(last):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        steps = max(1, int(np.ceil(np.linalg.norm(b - a) / max_step)))
        t = np.arange(steps) / steps
        pts.append(a[None, :] + t[:, None] * (b - a)[None, :])
    if not closed:
        pts.append(vertices[-1:])
    return np.concatenate(pts, axis=0)


def hausdorff(points_a, points_b, spacing_mm_per_px=1.0):
    """Symmetric Hausdorff distance between two point sets, scaled to mm.

    Densify contours beforehand (densify_contour) to measure contours rather
    than vertices.
    """
    a = np.atleast_2d(np.asarray(points_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(points_b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise MetricError("hausdorff requires nonempty point sets")
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    forward = np.sqrt(d2.min(axis=1)).max()
    backward = np.sqrt(d2.min(axis=0)).max()
    return float(max(forward, backward) * spacing_mm_per_px)


def contour_hausdorff(vertices_a, vertices_b, spacing_mm_per_px=1.0,
                      max_step=0.5, closed=True):
    """Hausdorff distance between closed polygon contours, densified so the
    discretization error stays below max_step/2 pixels."""
    return hausdorff(densify_contour(vertices_a, max_step, closed),
                     densify_contour(vertices_b, max_step, closed),
                     spacing_mm_per_px)


def dice(pred_labels, gt_labels, class_id):
    """2|P∩G| / (|P| + |G|); defined as 1.0 when both masks are empty."""
    pred_labels = np.asarray(pred_labels)
    gt_labels = np.asarray(gt_labels)
    if pred_labels.shape != gt_labels.shape:
        raise DimensionError(
            f"label map shapes differ: {pred_labels.shape} vs {gt_labels.shape}"
        )
    p = pred_labels == class_id
    g = gt_labels == class_id
    total = int(p.sum()) + int(g.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((p & g).sum()) / total
