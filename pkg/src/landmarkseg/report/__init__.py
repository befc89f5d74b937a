from .png import encode_gray_png
from .svg import box_plot, line_plot, overlay_plot

__all__ = ["encode_gray_png", "box_plot", "line_plot", "overlay_plot"]
