from .raster import (
    distance_to_mask_boundary,
    mask_boundary_segments,
    paint_labels,
    point_in_polygon,
    polygon_area,
    polygon_perimeter,
    polygons_disjoint,
    rasterize_polygon,
)
from .synthetic import (
    LandmarkSample,
    OrganSpec,
    SyntheticDataset,
    SyntheticShapeSpec,
    cyclic_adjacency,
    default_desk_organs,
    generate_dataset,
    generate_sample,
    reference_organs,
)
from .occlusion import occlude, sample_occlusion_box
from .split import split_dataset, split_indices
from .io import (
    load_dataset,
    load_image_pgm,
    load_landmarks,
    load_pgm,
    save_dataset,
    save_image_pgm,
    save_landmarks,
    save_pgm,
)

__all__ = [
    "distance_to_mask_boundary", "mask_boundary_segments",
    "paint_labels", "point_in_polygon", "polygon_area", "polygon_perimeter",
    "polygons_disjoint", "rasterize_polygon",
    "LandmarkSample", "OrganSpec", "SyntheticDataset", "SyntheticShapeSpec",
    "cyclic_adjacency", "default_desk_organs", "generate_dataset",
    "generate_sample", "reference_organs",
    "occlude", "sample_occlusion_box",
    "split_dataset", "split_indices",
    "load_dataset", "load_image_pgm", "load_landmarks", "load_pgm",
    "save_dataset", "save_image_pgm", "save_landmarks", "save_pgm",
]
