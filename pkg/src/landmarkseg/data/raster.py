"""Polygon rasterization and contour geometry.

Vertices are (x, y) in pixel units; pixel (r, c) has its center at
(c + 0.5, r + 0.5). A pixel is filled when its center passes the even-odd
test; center-on-boundary ties resolve toward the interior on the
right/bottom sides (half-open scanline rule), so adjacent polygons never
double-fill a pixel.
"""

import numpy as np

from ..errors import GeometryError


def rasterize_polygon(vertices, height, width):
    """Boolean (height, width) mask of the closed polygon interior."""
    vertices = np.asarray(vertices, dtype=np.float64)
    if vertices.ndim != 2 or vertices.shape[1] != 2 or vertices.shape[0] < 3:
        raise GeometryError(
            f"polygon needs at least 3 (x, y) vertices, got shape {vertices.shape}"
        )
    x1 = vertices[:, 0]
    y1 = vertices[:, 1]
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)
    keep = y1 != y2  # horizontal edges never cross a scanline
    x1, y1, x2, y2 = x1[keep], y1[keep], x2[keep], y2[keep]
    if x1.size == 0:
        return np.zeros((height, width), dtype=bool)
    row_centers = np.arange(height) + 0.5
    ylo = np.minimum(y1, y2)
    yhi = np.maximum(y1, y2)
    # crossings[r, e]: edge e spans this scanline, half-open (ylo, yhi]
    spans = (ylo[None, :] < row_centers[:, None]) & (row_centers[:, None] <= yhi[None, :])
    rows, edges = np.nonzero(spans)
    if rows.size == 0:
        return np.zeros((height, width), dtype=bool)
    t = (row_centers[rows] - y1[edges]) / (y2[edges] - y1[edges])
    x_int = x1[edges] + t * (x2[edges] - x1[edges])
    # columns with center x = c + 0.5 <= x_int flip parity; mark [0, k) runs
    k = np.clip(np.floor(x_int - 0.5).astype(np.int64) + 1, 0, width)
    flips = np.zeros((height, width + 1), dtype=np.int64)
    np.add.at(flips, (rows, np.zeros_like(rows)), 1)
    np.add.at(flips, (rows, k), -1)
    return (np.cumsum(flips[:, :width], axis=1) % 2).astype(bool)


def paint_labels(contours, class_ids, height, width):
    """Integer label map from (contour, class) pairs, painted in order."""
    mask = np.zeros((height, width), dtype=np.int64)
    for vertices, class_id in zip(contours, class_ids):
        mask[rasterize_polygon(vertices, height, width)] = class_id
    return mask


def polygon_area(vertices):
    """Shoelace area of a closed polygon."""
    v = np.asarray(vertices, dtype=np.float64)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_perimeter(vertices):
    v = np.asarray(vertices, dtype=np.float64)
    return float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())


def point_in_polygon(point, vertices):
    """Even-odd containment of a single point (geometry, not pixel rule)."""
    px, py = float(point[0]), float(point[1])
    v = np.asarray(vertices, dtype=np.float64)
    x1, y1 = v[:, 0], v[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    keep = y1 != y2
    x1, y1, x2, y2 = x1[keep], y1[keep], x2[keep], y2[keep]
    spans = (np.minimum(y1, y2) < py) & (py <= np.maximum(y1, y2))
    t = (py - y1[spans]) / (y2[spans] - y1[spans])
    x_int = x1[spans] + t * (x2[spans] - x1[spans])
    return bool(np.count_nonzero(px <= x_int) % 2)


def _segments_intersect(a1, a2, b1, b2):
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    d1 = orient(b1, b2, a1)
    d2 = orient(b1, b2, a2)
    d3 = orient(a1, a2, b1)
    d4 = orient(a1, a2, b2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def mask_boundary_segments(mask):
    """Unit segments (p0, p1) of the filled/unfilled interface of a boolean
    mask, in (x, y) pixel coordinates. Pixel (r, c) occupies the unit square
    [c, c+1] × [r, r+1]."""
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1)
    segments = []
    rr, cc = np.nonzero(mask & ~padded[:-2, 1:-1])   # open face above
    segments.append(np.stack([np.c_[cc, rr], np.c_[cc + 1, rr]], axis=1))
    rr, cc = np.nonzero(mask & ~padded[2:, 1:-1])    # below
    segments.append(np.stack([np.c_[cc, rr + 1], np.c_[cc + 1, rr + 1]], axis=1))
    rr, cc = np.nonzero(mask & ~padded[1:-1, :-2])   # left
    segments.append(np.stack([np.c_[cc, rr], np.c_[cc, rr + 1]], axis=1))
    rr, cc = np.nonzero(mask & ~padded[1:-1, 2:])    # right
    segments.append(np.stack([np.c_[cc + 1, rr], np.c_[cc + 1, rr + 1]], axis=1))
    return np.concatenate(segments, axis=0).astype(np.float64)


def distance_to_mask_boundary(points, mask):
    """Euclidean distance from each (x, y) point to the mask-region boundary."""
    segments = mask_boundary_segments(mask)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if segments.size == 0:
        return np.full(len(points), np.inf)
    p0 = segments[:, 0]
    d = segments[:, 1] - p0
    lengths_sq = (d ** 2).sum(axis=1)
    diff = points[:, None, :] - p0[None, :, :]
    t = np.clip((diff * d[None, :, :]).sum(axis=2) / lengths_sq[None, :], 0.0, 1.0)
    closest = p0[None, :, :] + t[:, :, None] * d[None, :, :]
    return np.sqrt(((points[:, None, :] - closest) ** 2).sum(axis=2)).min(axis=1)


def polygons_disjoint(a, b):
    """True when the two simple closed polygons neither cross nor contain
    each other (shared boundary points count as overlap)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if (a[:, 0].max() < b[:, 0].min() or b[:, 0].max() < a[:, 0].min()
            or a[:, 1].max() < b[:, 1].min() or b[:, 1].max() < a[:, 1].min()):
        return True
    for i in range(len(a)):
        a1, a2 = a[i], a[(i + 1) % len(a)]
        for j in range(len(b)):
            if _segments_intersect(a1, a2, b[j], b[(j + 1) % len(b)]):
                return False
    return not (point_in_polygon(a[0], b) or point_in_polygon(b[0], a))
