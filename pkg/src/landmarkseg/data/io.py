"""On-disk dataset formats.

Landmark files: UTF-8 text, a header naming the landmark count and per-organ
node ranges, then one "x y" line per landmark in normalized coordinates.
Images and masks: portable graymaps (P5 written, P2/P5 read). The manifest is
JSON listing sample files plus the shared adjacency path.
"""

import json
from pathlib import Path

import numpy as np

from ..errors import ParseError, ValidationError
from ..graph.structure import load_adjacency, save_adjacency
from .synthetic import (
    IMAGE_QUANT_LEVELS,
    LandmarkSample,
    SyntheticDataset,
    SyntheticShapeSpec,
)

_FLOAT_FMT = "{:.17g}"  # round-trips float64 exactly


def save_landmarks(path, coords, organ_ranges):
    coords = np.asarray(coords, dtype=np.float64)
    lines = [f"# landmarks {coords.shape[0]}"]
    for name, start, count, class_id in organ_ranges:
        lines.append(f"# organ {name} {start} {count} {class_id}")
    for x, y in coords:
        lines.append(f"{_FLOAT_FMT.format(x)} {_FLOAT_FMT.format(y)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_landmarks(path):
    """Returns (coords, organ_ranges)."""
    declared = None
    organ_ranges = []
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[:1] == ["landmarks"]:
                    declared = int(parts[1])
                elif parts[:1] == ["organ"]:
                    if len(parts) != 5:
                        raise ParseError(
                            "organ header needs 'organ name start count class'",
                            path=path, line=lineno)
                    organ_ranges.append(
                        (parts[1], int(parts[2]), int(parts[3]), int(parts[4])))
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected 'x y', got {line!r}",
                                 path=path, line=lineno)
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise ParseError(f"non-numeric coordinate in {line!r}",
                                 path=path, line=lineno)
    if declared is None:
        raise ParseError("missing '# landmarks N' header", path=path, line=1)
    if declared != len(rows):
        raise ParseError(
            f"header declares {declared} landmarks but body has {len(rows)}",
            path=path, line=declared)
    coords = np.asarray(rows, dtype=np.float64)
    if organ_ranges:
        covered = sum(c for _, _, c, _ in organ_ranges)
        if covered != declared:
            raise ParseError(
                f"organ ranges cover {covered} nodes, expected {declared}",
                path=path, line=1)
    return coords, organ_ranges


def save_pgm(path, values, maxval):
    """P5 graymap; integer array values must lie in [0, maxval]."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValidationError(f"PGM expects a 2-D array, got shape {values.shape}")
    if values.min() < 0 or values.max() > maxval:
        raise ValidationError("PGM values out of range")
    header = f"P5\n{values.shape[1]} {values.shape[0]}\n{maxval}\n".encode("ascii")
    if maxval < 256:
        payload = values.astype(np.uint8).tobytes()
    else:
        payload = values.astype(">u2").tobytes()
    Path(path).write_bytes(header + payload)


def load_pgm(path):
    """Returns (values int64 array, maxval); reads P2 and P5."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    # header tokens: magic, width, height, maxval ('#' comments allowed)
    while len(tokens) < 4:
        if pos >= len(data):
            raise ParseError("truncated PGM header", path=path)
        ch = data[pos:pos + 1]
        if ch == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                raise ParseError("unterminated comment", path=path)
            pos += 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    magic = tokens[0].decode("ascii")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ParseError("non-integer PGM header field", path=path)
    if magic == "P5":
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        count = width * height
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
        return raw.astype(np.int64).reshape(height, width), maxval
    if magic == "P2":
        body = data[pos:].split()
        if len(body) != width * height:
            raise ParseError(
                f"P2 body has {len(body)} values, expected {width * height}",
                path=path)
        vals = np.array([int(v) for v in body], dtype=np.int64)
        return vals.reshape(height, width), maxval
    raise ParseError(f"unsupported graymap magic {magic!r}", path=path)


def save_image_pgm(path, image):
    """Store a [0,1] grayscale image as 16-bit PGM."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 3:
        image = image[0]
    levels = np.round(image * IMAGE_QUANT_LEVELS).astype(np.int64)
    save_pgm(path, levels, IMAGE_QUANT_LEVELS)


def load_image_pgm(path):
    values, maxval = load_pgm(path)
    return (values.astype(np.float64) / maxval)[None]


def save_dataset(out_dir, dataset):
    """Write adjacency, per-sample files, and manifest.json into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_adjacency(out_dir / "adjacency.txt", dataset.graph)
    entries = []
    for sample in dataset.samples:
        stem = sample.sample_id
        save_image_pgm(out_dir / f"{stem}_image.pgm", sample.image)
        save_landmarks(out_dir / f"{stem}_landmarks.txt", sample.landmarks,
                       dataset.organ_ranges)
        save_pgm(out_dir / f"{stem}_mask.pgm", sample.mask,
                 dataset.num_classes - 1)
        entries.append({
            "id": stem,
            "image": f"{stem}_image.pgm",
            "landmarks": f"{stem}_landmarks.txt",
            "mask": f"{stem}_mask.pgm",
        })
    manifest = {
        "image_size": dataset.image_size,
        "num_classes": dataset.num_classes,
        "adjacency": "adjacency.txt",
        "organs": [
            {"name": n, "start": s, "count": c, "class_id": k}
            for n, s, c, k in dataset.organ_ranges
        ],
        "samples": entries,
    }
    if dataset.spec is not None:
        manifest["generation_spec"] = dataset.spec.to_dict()
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out_dir / "manifest.json"


def load_dataset(path):
    """Load a dataset from its manifest.json (or containing directory)."""
    path = Path(path)
    manifest_path = path / "manifest.json" if path.is_dir() else path
    root = manifest_path.parent
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid manifest JSON: {err}", path=manifest_path)
    graph = load_adjacency(root / manifest["adjacency"])
    organ_ranges = [(o["name"], o["start"], o["count"], o["class_id"])
                    for o in manifest["organs"]]
    organ_of_node = np.zeros(graph.num_nodes, dtype=np.int64)
    for organ_index, (_, start, count, _) in enumerate(organ_ranges):
        organ_of_node[start:start + count] = organ_index
    samples = []
    for entry in manifest["samples"]:
        image = load_image_pgm(root / entry["image"])
        coords, _ = load_landmarks(root / entry["landmarks"])
        if coords.shape[0] != graph.num_nodes:
            raise ParseError(
                f"sample {entry['id']} has {coords.shape[0]} landmarks, "
                f"adjacency expects {graph.num_nodes}",
                path=root / entry["landmarks"])
        mask, _ = load_pgm(root / entry["mask"])
        samples.append(LandmarkSample(
            sample_id=entry["id"], image=image, landmarks=coords,
            organ_labels=organ_of_node.copy(), mask=mask,
        ))
    spec = None
    if "generation_spec" in manifest:
        spec = SyntheticShapeSpec.from_dict(manifest["generation_spec"])
    return SyntheticDataset(
        samples=samples, graph=graph, organ_ranges=organ_ranges,
        image_size=manifest["image_size"], num_classes=manifest["num_classes"],
        spec=spec,
    )
