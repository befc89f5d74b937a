"""Self-contained SVG figures: line plots, box plots, and image overlays.

Built on xml.etree so every emitted file is well-formed XML; no external
renderer is involved.
"""

import base64
import xml.etree.ElementTree as ET

import numpy as np

from ..errors import ValidationError
from .png import encode_gray_png

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f")


def _svg_root(width, height):
    root = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(width), "height": str(height),
        "viewBox": f"0 0 {width} {height}",
    })
    ET.SubElement(root, "rect", {"x": "0", "y": "0", "width": str(width),
                                 "height": str(height), "fill": "white"})
    return root


def _write(root, path):
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)


def _nice_ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10.0 ** np.floor(np.log10(span / count))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= count:
            step *= mult
            break
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + 0.5 * step, step)


class _Axes:
    def __init__(self, root, x_range, y_range, size=(640, 420),
                 margin=(70, 20, 45, 30), x_label="", y_label=""):
        self.root = root
        self.left, self.right = margin[0], size[0] - margin[1]
        self.top, self.bottom = margin[3], size[1] - margin[2]
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        ET.SubElement(root, "rect", {
            "x": str(self.left), "y": str(self.top),
            "width": str(self.right - self.left),
            "height": str(self.bottom - self.top),
            "fill": "none", "stroke": "#333333"})
        for tick in _nice_ticks(self.x0, self.x1):
            px = self.px(tick)
            ET.SubElement(root, "line", {
                "x1": f"{px:.2f}", "y1": str(self.bottom),
                "x2": f"{px:.2f}", "y2": str(self.bottom + 4),
                "stroke": "#333333"})
            self.text(px, self.bottom + 16, f"{tick:g}", anchor="middle", size=11)
        for tick in _nice_ticks(self.y0, self.y1):
            py = self.py(tick)
            ET.SubElement(root, "line", {
                "x1": str(self.left - 4), "y1": f"{py:.2f}",
                "x2": str(self.left), "y2": f"{py:.2f}", "stroke": "#333333"})
            self.text(self.left - 7, py + 4, f"{tick:g}", anchor="end", size=11)
        if x_label:
            self.text((self.left + self.right) / 2, self.bottom + 34, x_label,
                      anchor="middle", size=12)
        if y_label:
            label = ET.SubElement(root, "text", {
                "x": "16", "y": str((self.top + self.bottom) / 2),
                "text-anchor": "middle", "font-size": "12",
                "font-family": "sans-serif",
                "transform": f"rotate(-90 16 {(self.top + self.bottom) / 2})"})
            label.text = y_label

    def px(self, x):
        return self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def py(self, y):
        return self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)

    def text(self, x, y, content, anchor="start", size=12, color="#111111"):
        el = ET.SubElement(self.root, "text", {
            "x": f"{x:.2f}", "y": f"{y:.2f}", "text-anchor": anchor,
            "font-size": str(size), "font-family": "sans-serif",
            "fill": color})
        el.text = str(content)


def line_plot(path, series, x_label="", y_label="", title=""):
    """series: mapping name -> (xs, ys). One marker per point plus a polyline."""
    if not series:
        raise ValidationError("line_plot needs at least one series")
    cleaned = {}
    for name, (xs, ys) in series.items():
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if xs.size == 0 or xs.shape != ys.shape:
            raise ValidationError(f"series {name!r} is empty or mismatched")
        cleaned[name] = (xs, ys)
    all_x = np.concatenate([v[0] for v in cleaned.values()])
    all_y = np.concatenate([v[1] for v in cleaned.values()])
    pad_y = 0.05 * (all_y.max() - all_y.min() + 1e-12)
    root = _svg_root(640, 420)
    axes = _Axes(root, (all_x.min(), all_x.max()),
                 (all_y.min() - pad_y, all_y.max() + pad_y),
                 x_label=x_label, y_label=y_label)
    if title:
        axes.text(320, 18, title, anchor="middle", size=14)
    for i, (name, (xs, ys)) in enumerate(cleaned.items()):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{axes.px(x):.2f},{axes.py(y):.2f}"
                          for x, y in zip(xs, ys))
        if len(xs) > 1:
            ET.SubElement(root, "polyline", {
                "points": points, "fill": "none", "stroke": color,
                "stroke-width": "2"})
        for x, y in zip(xs, ys):
            ET.SubElement(root, "circle", {
                "cx": f"{axes.px(x):.2f}", "cy": f"{axes.py(y):.2f}",
                "r": "3.5", "fill": color})
        axes.text(axes.right - 8, axes.top + 16 + 15 * i, name,
                  anchor="end", size=12, color=color)
    _write(root, path)


def box_plot(path, groups, y_label="", title=""):
    """groups: mapping name -> list of values; whiskers at min/max, box at
    the Tukey hinges."""
    if not groups:
        raise ValidationError("box_plot needs at least one group")
    from ..metrics.stats import tukey_quartiles

    values = {k: np.asarray(v, dtype=np.float64) for k, v in groups.items()}
    for k, v in values.items():
        if v.size == 0:
            raise ValidationError(f"group {k!r} is empty")
    lo = min(v.min() for v in values.values())
    hi = max(v.max() for v in values.values())
    pad = 0.05 * (hi - lo + 1e-12)
    root = _svg_root(max(360, 90 * len(values) + 120), 420)
    axes = _Axes(root, (0.0, float(len(values))), (lo - pad, hi + pad),
                 y_label=y_label)
    if title:
        axes.text((axes.left + axes.right) / 2, 18, title, anchor="middle", size=14)
    for i, (name, v) in enumerate(values.items()):
        q1, med, q3 = tukey_quartiles(v)
        cx = axes.px(i + 0.5)
        half = 0.3 * (axes.px(1) - axes.px(0))
        color = PALETTE[i % len(PALETTE)]
        ET.SubElement(root, "line", {
            "x1": f"{cx:.2f}", "y1": f"{axes.py(v.min()):.2f}",
            "x2": f"{cx:.2f}", "y2": f"{axes.py(v.max()):.2f}",
            "stroke": color})
        ET.SubElement(root, "rect", {
            "x": f"{cx - half:.2f}", "y": f"{axes.py(q3):.2f}",
            "width": f"{2 * half:.2f}",
            "height": f"{max(0.5, axes.py(q1) - axes.py(q3)):.2f}",
            "fill": color, "fill-opacity": "0.35", "stroke": color})
        ET.SubElement(root, "line", {
            "x1": f"{cx - half:.2f}", "y1": f"{axes.py(med):.2f}",
            "x2": f"{cx + half:.2f}", "y2": f"{axes.py(med):.2f}",
            "stroke": color, "stroke-width": "2"})
        axes.text(cx, axes.bottom + 16, name, anchor="middle", size=11)
    _write(root, path)


def overlay_plot(path, image, contours, scale=6):
    """Image with contour overlays.

    contours: list of (vertices in normalized coords, color, closed_flag) or
    (vertices, color); the image is embedded as a base64 PNG.
    """
    image = np.asarray(image)
    if image.ndim == 3:
        image = image[0]
    height, width = image.shape
    vw, vh = width * scale, height * scale
    root = _svg_root(vw, vh)
    encoded = base64.b64encode(encode_gray_png(image)).decode("ascii")
    ET.SubElement(root, "image", {
        "x": "0", "y": "0", "width": str(vw), "height": str(vh),
        "href": f"data:image/png;base64,{encoded}",
        "preserveAspectRatio": "none",
        "style": "image-rendering:pixelated",
    })
    for entry in contours:
        vertices, color = entry[0], entry[1]
        closed = entry[2] if len(entry) > 2 else True
        vertices = np.asarray(vertices, dtype=np.float64)
        points = " ".join(
            f"{x * vw:.2f},{y * vh:.2f}" for x, y in vertices)
        tag = "polygon" if closed else "polyline"
        ET.SubElement(root, tag, {
            "points": points, "fill": "none", "stroke": color,
            "stroke-width": "1.5"})
        for x, y in vertices:
            ET.SubElement(root, "circle", {
                "cx": f"{x * vw:.2f}", "cy": f"{y * vh:.2f}", "r": "2",
                "fill": color})
    _write(root, path)
