import io
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from PIL import Image

from landmarkseg.errors import ValidationError
from landmarkseg.report import box_plot, encode_gray_png, line_plot, overlay_plot


class TestPng:
    def test_decodes_and_matches_pixels(self, rng):
        image = rng.random((9, 13))
        png = encode_gray_png(image)
        decoded = np.asarray(Image.open(io.BytesIO(png)))
        assert decoded.shape == (9, 13)
        assert np.array_equal(decoded,
                              np.clip(np.round(image * 255), 0, 255))

    def test_accepts_channel_dim(self, rng):
        png = encode_gray_png(rng.random((1, 4, 4)))
        assert Image.open(io.BytesIO(png)).size == (4, 4)


class TestSvg:
    def test_line_plot_well_formed(self, tmp_path, rng):
        path = tmp_path / "lines.svg"
        line_plot(path, {"a": ([0, 1, 2], [0.1, 0.5, 0.3]),
                         "b": ([0, 1, 2], [0.4, 0.2, 0.6])},
                  x_label="x", y_label="y", title="two series")
        tree = ET.parse(path)
        ns = "{http://www.w3.org/2000/svg}"
        assert len(tree.findall(f".//{ns}polyline")) == 2

    def test_single_point_gets_marker(self, tmp_path):
        path = tmp_path / "point.svg"
        line_plot(path, {"only": ([3.0], [7.0])})
        tree = ET.parse(path)
        ns = "{http://www.w3.org/2000/svg}"
        assert len(tree.findall(f".//{ns}circle")) == 1
        assert not tree.findall(f".//{ns}polyline")

    def test_empty_series_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            line_plot(tmp_path / "x.svg", {})
        with pytest.raises(ValidationError):
            line_plot(tmp_path / "x.svg", {"a": ([], [])})

    def test_box_plot_well_formed(self, tmp_path, rng):
        path = tmp_path / "boxes.svg"
        box_plot(path, {"m1": rng.random(20), "m2": rng.random(5) + 0.5},
                 y_label="metric")
        ET.parse(path)

    def test_overlay_embeds_png_and_contours(self, tmp_path, rng):
        path = tmp_path / "overlay.svg"
        contour = np.array([[0.2, 0.2], [0.8, 0.3], [0.5, 0.9]])
        overlay_plot(path, rng.random((16, 16)), [(contour, "#d62728")])
        tree = ET.parse(path)
        ns = "{http://www.w3.org/2000/svg}"
        image = tree.find(f".//{ns}image")
        assert image is not None
        assert image.get("href").startswith("data:image/png;base64,")
        assert tree.findall(f".//{ns}polygon")
