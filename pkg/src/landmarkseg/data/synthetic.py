"""Synthetic paired dataset: anti-aliased organ images, landmark contours on a
shared cyclic adjacency, and dense label masks.

Each organ is a perturbed ellipse: equally spaced boundary landmarks, low-order
radial harmonics per sample, and a global affine jitter shared by all organs.
Organs are laid out disjointly so every landmark stays on the boundary of its
own organ's mask region; samples violating bounds or disjointness are
rejection-resampled.
"""

from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import GenerationError, ValidationError
from ..graph.structure import Graph
from .raster import paint_labels, polygons_disjoint, rasterize_polygon

IMAGE_QUANT_LEVELS = 65535


@dataclass
class OrganSpec:
    name: str
    class_id: int
    num_landmarks: int
    center: tuple
    axes: tuple
    rotation: float = 0.0
    intensity: float = 0.5


@dataclass
class SyntheticShapeSpec:
    """Generator parameters; defaults give the 64×64, 40-landmark desk scale."""

    organs: list = field(default_factory=lambda: default_desk_organs())
    image_size: int = 64
    num_classes: int = 4
    background_intensity: float = 0.12
    perturb_amplitude: float = 0.05
    harmonics: tuple = (2, 3, 4)
    rotation_jitter: float = 0.05
    scale_jitter: float = 0.06
    translation_jitter: float = 0.02
    blur_sigma: float = 0.8
    noise_level: float = 0.02
    seed: int = 0
    max_attempts: int = 60

    def __post_init__(self):
        if not self.organs:
            raise ValidationError("spec needs at least one organ")
        for organ in self.organs:
            if organ.num_landmarks < 3:
                raise ValidationError(
                    f"organ {organ.name!r} needs >= 3 landmarks"
                )
            if organ.class_id < 1 or organ.class_id >= self.num_classes:
                raise ValidationError(
                    f"organ {organ.name!r} class_id {organ.class_id} outside "
                    f"[1, {self.num_classes - 1}]"
                )

    @property
    def num_nodes(self):
        return sum(o.num_landmarks for o in self.organs)

    def organ_ranges(self):
        """(name, start, count, class_id) node ranges, in organ order."""
        ranges = []
        start = 0
        for organ in self.organs:
            ranges.append((organ.name, start, organ.num_landmarks, organ.class_id))
            start += organ.num_landmarks
        return ranges

    def to_dict(self):
        d = asdict(self)
        d["organs"] = [asdict(o) for o in self.organs]
        return d

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown spec fields: {sorted(unknown)}")
        d = dict(d)
        if "organs" in d:
            organ_fields = set(OrganSpec.__dataclass_fields__)
            organs = []
            for o in d["organs"]:
                bad = set(o) - organ_fields
                if bad:
                    raise ValidationError(f"unknown organ fields: {sorted(bad)}")
                o = dict(o)
                o["center"] = tuple(o["center"])
                o["axes"] = tuple(o["axes"])
                organs.append(OrganSpec(**o))
            d["organs"] = organs
        for key in ("harmonics",):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def default_desk_organs():
    """Five disjoint organs (lungs, heart, two clavicles), 40 landmarks."""
    return [
        OrganSpec("right-lung", 1, 11, (0.30, 0.45), (0.150, 0.225), 0.08, 0.45),
        OrganSpec("left-lung", 1, 11, (0.70, 0.45), (0.150, 0.225), -0.08, 0.45),
        OrganSpec("heart", 2, 8, (0.50, 0.72), (0.130, 0.100), 0.0, 0.75),
        OrganSpec("right-clavicle", 3, 5, (0.27, 0.13), (0.100, 0.052), 0.15, 0.95),
        OrganSpec("left-clavicle", 3, 5, (0.73, 0.13), (0.100, 0.052), -0.15, 0.95),
    ]


def reference_organs():
    """166-landmark partition mirroring the full-resolution annotation counts."""
    return [
        OrganSpec("right-lung", 1, 44, (0.30, 0.45), (0.150, 0.225), 0.08, 0.45),
        OrganSpec("left-lung", 1, 44, (0.70, 0.45), (0.150, 0.225), -0.08, 0.45),
        OrganSpec("heart", 2, 26, (0.50, 0.72), (0.130, 0.100), 0.0, 0.75),
        OrganSpec("right-clavicle", 3, 26, (0.27, 0.13), (0.100, 0.052), 0.15, 0.95),
        OrganSpec("left-clavicle", 3, 26, (0.73, 0.13), (0.100, 0.052), -0.15, 0.95),
    ]


@dataclass
class LandmarkSample:
    """One paired training example."""

    sample_id: str
    image: np.ndarray      # (1, H, W) in [0, 1]
    landmarks: np.ndarray  # (num_nodes, 2) normalized (x, y)
    organ_labels: np.ndarray  # per-node organ index into the layout
    mask: np.ndarray       # (H, W) integer class labels


@dataclass
class SyntheticDataset:
    samples: list
    graph: Graph
    organ_ranges: list
    image_size: int
    num_classes: int
    spec: SyntheticShapeSpec = None

    def __len__(self):
        return len(self.samples)

    def images(self):
        return np.stack([s.image for s in self.samples])

    def landmarks(self):
        return np.stack([s.landmarks for s in self.samples])

    def masks(self):
        return np.stack([s.mask for s in self.samples])

    def subset(self, samples):
        return SyntheticDataset(list(samples), self.graph, self.organ_ranges,
                                self.image_size, self.num_classes, self.spec)


def cyclic_adjacency(organ_ranges, num_nodes):
    """Closed per-organ cycles: consecutive landmarks plus the closing edge."""
    edges = []
    for _, start, count, _ in organ_ranges:
        for k in range(count):
            edges.append((start + k, start + (k + 1) % count))
    return Graph(num_nodes, tuple(edges))


def _sample_contours(spec, rng):
    """Perturbed per-organ contours in normalized coordinates."""
    angle = rng.uniform(-spec.rotation_jitter, spec.rotation_jitter)
    scale = 1.0 + rng.uniform(-spec.scale_jitter, spec.scale_jitter)
    shift = rng.uniform(-spec.translation_jitter, spec.translation_jitter, size=2)
    rot = np.array([[np.cos(angle), -np.sin(angle)],
                    [np.sin(angle), np.cos(angle)]])
    contours = []
    for organ in spec.organs:
        theta = 2.0 * np.pi * np.arange(organ.num_landmarks) / organ.num_landmarks
        radial = np.zeros_like(theta)
        for h in spec.harmonics:
            amp = rng.uniform(0.0, spec.perturb_amplitude) / len(spec.harmonics)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            radial += amp * np.cos(h * theta + phase)
        co, so = np.cos(organ.rotation), np.sin(organ.rotation)
        local = np.stack([
            organ.axes[0] * np.cos(theta) * (1.0 + radial),
            organ.axes[1] * np.sin(theta) * (1.0 + radial),
        ], axis=1)
        local = local @ np.array([[co, so], [-so, co]])
        points = local + np.asarray(organ.center)
        # global affine about the image center
        points = (points - 0.5) @ rot.T * scale + 0.5 + shift
        contours.append(points)
    return contours


def _contours_valid(contours):
    for pts in contours:
        if pts.min() < 0.005 or pts.max() > 0.995:
            return False
    for i in range(len(contours)):
        for j in range(i + 1, len(contours)):
            if not polygons_disjoint(contours[i], contours[j]):
                return False
    return True


def _gaussian_blur(image, sigma):
    """Separable Gaussian with edge-replicate padding."""
    if sigma <= 0:
        return image
    radius = max(1, int(np.ceil(3.0 * sigma)))
    xs = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (xs / sigma) ** 2)
    kernel /= kernel.sum()
    padded = np.pad(image, radius, mode="edge")
    rows = np.apply_along_axis(
        lambda r: np.convolve(r, kernel, mode="valid"), 1, padded)
    return np.apply_along_axis(
        lambda c: np.convolve(c, kernel, mode="valid"), 0, rows)


def _render_image(spec, contours, rng):
    size = spec.image_size
    # 2x supersampled intensity painting, then box-filter down
    hi = 2 * size
    canvas = np.full((hi, hi), spec.background_intensity)
    for organ, pts in zip(spec.organs, contours):
        fill = rasterize_polygon(pts * hi, hi, hi)
        canvas[fill] = organ.intensity
    image = canvas.reshape(size, 2, size, 2).mean(axis=(1, 3))
    image = _gaussian_blur(image, spec.blur_sigma)
    image = image + rng.normal(0.0, spec.noise_level, size=image.shape)
    image = np.clip(image, 0.0, 1.0)
    return np.round(image * IMAGE_QUANT_LEVELS) / IMAGE_QUANT_LEVELS


def generate_sample(spec, index):
    """Deterministic sample for (spec.seed, index)."""
    rng = np.random.default_rng([spec.seed, index])
    contours = None
    for _ in range(spec.max_attempts):
        candidate = _sample_contours(spec, rng)
        if _contours_valid(candidate):
            contours = candidate
            break
    if contours is None:
        raise GenerationError(
            f"sample {index}: no valid contour layout within "
            f"{spec.max_attempts} attempts; reduce perturbation or jitter"
        )
    size = spec.image_size
    image = _render_image(spec, contours, rng)[None]
    mask = paint_labels([pts * size for pts in contours],
                        [o.class_id for o in spec.organs], size, size)
    landmarks = np.concatenate(contours, axis=0)
    organ_labels = np.concatenate([
        np.full(o.num_landmarks, i, dtype=np.int64)
        for i, o in enumerate(spec.organs)
    ])
    return LandmarkSample(
        sample_id=f"s{index:04d}", image=image, landmarks=landmarks,
        organ_labels=organ_labels, mask=mask,
    )


def generate_dataset(spec, n):
    """n paired samples sharing one adjacency built from per-organ cycles."""
    if n < 1:
        raise ValidationError("need n >= 1 samples")
    ranges = spec.organ_ranges()
    graph = cyclic_adjacency(ranges, spec.num_nodes)
    samples = [generate_sample(spec, i) for i in range(n)]
    return SyntheticDataset(samples=samples, graph=graph, organ_ranges=ranges,
                            image_size=spec.image_size,
                            num_classes=spec.num_classes, spec=spec)
