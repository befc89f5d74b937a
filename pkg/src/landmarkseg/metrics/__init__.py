from .segmentation import (
    contour_hausdorff,
    densify_contour,
    dice,
    hausdorff,
    landmark_mse,
)
from .stats import (
    ExperimentRecord,
    ReportSummary,
    aggregate_report,
    tukey_quartiles,
    wilcoxon_signed_rank,
)

__all__ = [
    "contour_hausdorff", "densify_contour", "dice", "hausdorff", "landmark_mse",
    "ExperimentRecord", "ReportSummary", "aggregate_report", "tukey_quartiles",
    "wilcoxon_signed_rank",
]
