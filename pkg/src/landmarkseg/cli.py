"""Command-line harness: data generation, pretraining, coupling/fine-tuning,
benchmark protocols, and plotting.

Every command takes --seed/--config/--out/--force; outputs are rerunnable and
byte-identical for identical inputs and seeds (timestamps live only in
run_manifest.json). The LANDMARKSEG_OUT_ROOT environment variable provides a
default root for relative --out paths.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .data.io import load_dataset, save_dataset
from .data.split import split_dataset
from .data.synthetic import SyntheticShapeSpec, generate_dataset
from .errors import ConfigError, LandmarkSegError, ParseError, ValidationError
from .experiments import (
    mask_input_images,
    run_landmark_benchmark,
    run_occlusion_sweep,
)
from .models import (
    FCVAE,
    FCVAEBaseline,
    GraphVAE,
    HybridNet,
    ImageVAE,
    ModelConfig,
    PCABaseline,
    PCAShapeModel,
    UNet,
    load_model,
)
from .report.svg import box_plot, line_plot

OUT_ROOT_ENV = "LANDMARKSEG_OUT_ROOT"

TRAIN_DEFAULTS = {
    # calibrated on the 64x64 / 40-node / 200-sample desk benchmark
    "pretrain-image-vae": {"epochs": 18, "learning_rate": 2e-3, "batch_size": 16},
    "pretrain-graph-vae": {"epochs": 300, "learning_rate": 2e-3, "batch_size": 16},
    "train-hybrid": {"epochs": 30, "learning_rate": 2e-3, "batch_size": 16},
    "train-pca": {"epochs": 30, "learning_rate": 2e-3, "batch_size": 16},
    "train-fc-vae": {"epochs": 30, "learning_rate": 2e-3, "batch_size": 16,
                     "pretrain_epochs": 300},
    "train-unet": {"epochs": 18, "learning_rate": 2e-3, "batch_size": 16},
}


# -- shared plumbing -----------------------------------------------------------


def resolve_out(path):
    path = Path(path)
    root = os.environ.get(OUT_ROOT_ENV)
    if root and not path.is_absolute():
        return Path(root) / path
    return path


def prepare_out_dir(path, force):
    out = resolve_out(path)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise ConfigError(
                f"output directory {out} is not empty; pass --force to overwrite"
            )
    out.mkdir(parents=True, exist_ok=True)
    return out


def file_sha256(path):
    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def dataset_sha256(manifest_path):
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.json"
    digest = hashlib.sha256()
    digest.update(manifest_path.read_bytes())
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    root = manifest_path.parent
    for entry in manifest["samples"]:
        for key in ("image", "landmarks", "mask"):
            digest.update(Path(root / entry[key]).read_bytes())
    return digest.hexdigest()


def config_sha256(config_dict):
    canonical = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_run_config(args, command_key):
    """Resolve {model, train} configuration from --config plus flag overrides."""
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ParseError(f"invalid config JSON: {err}", path=args.config)
        unknown = set(file_cfg) - {"model", "train", "spacing_mm_per_px"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    model_cfg = ModelConfig.from_dict(file_cfg.get("model", {}))
    train = dict(TRAIN_DEFAULTS.get(command_key, {}))
    train.update(file_cfg.get("train", {}))
    for flag, key in (("epochs", "epochs"), ("lr", "learning_rate"),
                      ("batch_size", "batch_size"),
                      ("pretrain_epochs", "pretrain_epochs")):
        value = getattr(args, flag, None)
        if value is not None:
            train[key] = value
    spacing = file_cfg.get("spacing_mm_per_px", 1.0)
    if getattr(args, "spacing", None) is not None:
        spacing = args.spacing
    return model_cfg, train, spacing


def write_run_manifest(out_dir, command, args, extra):
    manifest = {
        "command": command,
        "seed": getattr(args, "seed", None),
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
    }
    manifest.update(extra)
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_loss_trace(path, trace):
    columns = sorted({k for row in trace for k in row if k != "epoch"})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", *columns])
        for row in trace:
            writer.writerow([row["epoch"]] + [repr(float(row[c])) for c in columns])


def load_split(args):
    dataset = load_dataset(args.data)
    which = getattr(args, "split", "all")
    if which == "all":
        return dataset
    train, val, test = split_dataset(dataset, args.split_seed)
    return {"train": train, "val": val, "test": test}[which]


def training_inputs(dataset, mask_input):
    return mask_input_images(dataset) if mask_input else dataset.images()


def parse_model_args(pairs):
    models = {}
    hashes = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(
                f"--model expects name=checkpoint, got {pair!r}")
        name, _, path = pair.partition("=")
        if name in models:
            raise ConfigError(f"duplicate model name {name!r}")
        if not Path(path).exists():
            raise ConfigError(f"checkpoint for model {name!r} not found: {path}")
        models[name] = load_model(path)
        hashes[name] = file_sha256(path)
    if not models:
        raise ConfigError("no models given; pass --model name=checkpoint")
    return models, hashes


# -- commands ------------------------------------------------------------------


def cmd_gen_data(args):
    if args.spec:
        try:
            spec_dict = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ParseError(f"invalid spec JSON: {err}", path=args.spec)
        spec = SyntheticShapeSpec.from_dict(spec_dict)
    else:
        spec = SyntheticShapeSpec()
    if args.seed is not None:
        spec.seed = args.seed
    out = prepare_out_dir(args.out, args.force)
    dataset = generate_dataset(spec, args.num_samples)
    manifest_path = save_dataset(out, dataset)
    print(f"generated {len(dataset)} samples: |V|={dataset.graph.num_nodes} "
          f"|E|={dataset.graph.num_edges}")
    write_run_manifest(out, "gen-data", args, {
        "num_samples": args.num_samples,
        "spec": spec.to_dict(),
        "dataset_hash": dataset_sha256(manifest_path),
    })
    return 0


def _save_training_outputs(out, args, command, model, train, extra):
    model_path = out / "model.ckpt"
    model.save(model_path, extra_meta={"seed": args.seed})
    write_loss_trace(out / "loss_trace.csv", model.loss_trace_)
    info = {
        "train": train,
        "config": model.config_.to_dict(),
        "dataset_hash": dataset_sha256(args.data),
        "initial_losses": model.initial_losses_,
        "final_losses": model.loss_trace_[-1] if model.loss_trace_ else {},
        "parameter_count": model.parameter_count(),
        "checkpoint_hash": file_sha256(model_path),
    }
    info["config_hash"] = config_sha256(info["config"])
    info.update(extra)
    write_run_manifest(out, command, args, info)
    print(f"{command}: {model.parameter_count()} parameters, "
          f"final losses {info['final_losses']} -> {model_path}")


def cmd_pretrain(args):
    command_key = f"pretrain-{args.kind}"
    model_cfg, train, _ = load_run_config(args, command_key)
    out = prepare_out_dir(args.out, args.force)
    dataset = load_split(args)
    if args.kind == "image-vae":
        model = ImageVAE(config=model_cfg, out_channels=1,
                         learning_rate=train["learning_rate"],
                         batch_size=train["batch_size"],
                         epochs=train["epochs"], seed=args.seed)
        model.fit(training_inputs(dataset, args.mask_input))
    elif args.kind == "graph-vae":
        model = GraphVAE(graph=dataset.graph, config=model_cfg,
                         learning_rate=train["learning_rate"],
                         batch_size=train["batch_size"],
                         epochs=train["epochs"], seed=args.seed)
        model.fit(dataset.landmarks())
    else:
        raise ConfigError(f"unknown pretraining kind {args.kind!r}")
    _save_training_outputs(out, args, f"pretrain {args.kind}", model, train,
                           {"mask_input": bool(args.mask_input)})
    return 0


def cmd_train_hybrid(args):
    if not args.image_vae or not args.graph_vae:
        raise ConfigError(
            "train-hybrid requires --image-vae and --graph-vae checkpoints; "
            "run 'pretrain --kind image-vae' and 'pretrain --kind graph-vae' first"
        )
    _, train, _ = load_run_config(args, "train-hybrid")
    out = prepare_out_dir(args.out, args.force)
    dataset = load_split(args)
    image_vae = ImageVAE.load(args.image_vae)
    graph_vae = GraphVAE.load(args.graph_vae)
    model = HybridNet.from_pretrained(
        image_vae, graph_vae, variant=args.variant,
        learning_rate=train["learning_rate"], batch_size=train["batch_size"],
        epochs=train["epochs"], seed=args.seed)
    masks = dataset.masks() if args.variant in ("dual", "dual-sc") else None
    model.fit(training_inputs(dataset, args.mask_input), dataset.landmarks(),
              masks=masks)
    _save_training_outputs(out, args, f"train-hybrid {args.variant}", model,
                           train, {
                               "variant": args.variant,
                               "mask_input": bool(args.mask_input),
                               "image_vae": file_sha256(args.image_vae),
                               "graph_vae": file_sha256(args.graph_vae),
                           })
    return 0


def cmd_train_baseline(args):
    if not args.image_vae:
        raise ConfigError(
            "train-baseline requires --image-vae (shared pretrained encoder); "
            "run 'pretrain --kind image-vae' first"
        )
    command_key = f"train-{args.kind}"
    _, train, _ = load_run_config(args, command_key)
    out = prepare_out_dir(args.out, args.force)
    dataset = load_split(args)
    image_vae = ImageVAE.load(args.image_vae)
    inputs = training_inputs(dataset, args.mask_input)
    extra = {"mask_input": bool(args.mask_input),
             "image_vae": file_sha256(args.image_vae)}
    if args.kind == "pca":
        shape_model = PCAShapeModel(n_modes=args.n_modes).fit(dataset.landmarks())
        model = PCABaseline.from_pretrained(
            image_vae, shape_model, learning_rate=train["learning_rate"],
            batch_size=train["batch_size"], epochs=train["epochs"],
            seed=args.seed)
        model.fit(inputs, dataset.landmarks())
        extra["n_coefficients"] = model.n_coefficients_
    elif args.kind == "fc-vae":
        fc_vae = FCVAE(num_nodes=dataset.graph.num_nodes,
                       config=image_vae.config_,
                       learning_rate=train["learning_rate"],
                       batch_size=train["batch_size"],
                       epochs=train.get("pretrain_epochs", 300),
                       seed=args.seed)
        fc_vae.fit(dataset.landmarks())
        model = FCVAEBaseline.from_pretrained(
            image_vae, fc_vae, learning_rate=train["learning_rate"],
            batch_size=train["batch_size"], epochs=train["epochs"],
            seed=args.seed)
        model.fit(inputs, dataset.landmarks())
        extra["fc_vae_final_losses"] = fc_vae.loss_trace_[-1]
    elif args.kind == "unet":
        model = UNet.from_pretrained(
            image_vae, learning_rate=train["learning_rate"],
            batch_size=train["batch_size"], epochs=train["epochs"],
            seed=args.seed)
        model.fit(inputs, dataset.masks())
    else:
        raise ConfigError(f"unknown baseline kind {args.kind!r}")
    _save_training_outputs(out, args, f"train-baseline {args.kind}", model,
                           train, extra)
    return 0


def cmd_experiment1(args):
    _, _, spacing = load_run_config(args, "experiment1")
    out = prepare_out_dir(args.out, args.force)
    dataset = load_split(args)
    models, model_hashes = parse_model_args(args.model)
    _, summary = run_landmark_benchmark(
        models, dataset, out, spacing_mm_per_px=spacing,
        overlays=args.overlays)
    write_run_manifest(out, "experiment1", args, {
        "models": model_hashes,
        "dataset_hash": dataset_sha256(args.data),
        "record_count": len(dataset) * len(models),
    })
    for model, metric, mean, median, _, _ in summary.rows:
        print(f"experiment1 {model} {metric}: mean={mean:.4f} median={median:.4f}")
    return 0


def cmd_experiment2(args):
    _, _, spacing = load_run_config(args, "experiment2")
    out = prepare_out_dir(args.out, args.force)
    dataset = load_split(args)
    models, model_hashes = parse_model_args(args.model)
    inputs = mask_input_images(dataset)
    _, summary = run_landmark_benchmark(
        models, dataset, out, spacing_mm_per_px=spacing,
        overlays=args.overlays, inputs=inputs, write_landmark_files=True)
    write_run_manifest(out, "experiment2", args, {
        "models": model_hashes,
        "dataset_hash": dataset_sha256(args.data),
    })
    for model, metric, mean, median, _, _ in summary.rows:
        print(f"experiment2 {model} {metric}: mean={mean:.4f} median={median:.4f}")
    return 0


def cmd_experiment3(args):
    _, _, spacing = load_run_config(args, "experiment3")
    out = prepare_out_dir(args.out, args.force)
    dataset = load_split(args)
    dual = load_model(args.dual)
    unet = load_model(args.unet)
    fractions = [float(v) for v in args.box_fracs.split(",") if v != ""]
    if not fractions:
        raise ConfigError("--box-fracs must list at least one fraction")
    curves = run_occlusion_sweep(dual, unet, dataset, fractions, args.seed,
                                 out, spacing_mm_per_px=spacing)
    write_run_manifest(out, "experiment3", args, {
        "box_fractions": fractions,
        "dataset_hash": dataset_sha256(args.data),
        "dual": file_sha256(args.dual),
        "unet": file_sha256(args.unet),
    })
    for branch, points in curves.items():
        first, last = points[0], points[-1]
        print(f"experiment3 {branch}: dice {first[1]:.4f} (box {first[0]}) -> "
              f"{last[1]:.4f} (box {last[0]})")
    return 0


def cmd_plot(args):
    csv_path = Path(args.csv)
    if not csv_path.exists():
        raise ConfigError(f"CSV not found: {csv_path}")
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValidationError(f"CSV {csv_path} has no data rows")
    out = resolve_out(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.kind == "line":
        series = {}
        for row in rows:
            if args.y not in row or row[args.y] in ("", None):
                continue
            key = row[args.group] if args.group else "series"
            series.setdefault(key, ([], []))
            series[key][0].append(float(row[args.x]))
            series[key][1].append(float(row[args.y]))
        series = {k: v for k, v in series.items() if v[0]}
        if not series:
            raise ValidationError("no plottable points for the given columns")
        line_plot(out, series, x_label=args.x, y_label=args.y,
                  title=csv_path.stem)
    elif args.kind == "box":
        groups = {}
        for row in rows:
            if args.value not in row or row[args.value] in ("", None):
                continue
            key = row[args.group] if args.group else "all"
            groups.setdefault(key, []).append(float(row[args.value]))
        groups = {k: v for k, v in groups.items() if v}
        if not groups:
            raise ValidationError("no plottable values for the given columns")
        box_plot(out, groups, y_label=args.value, title=csv_path.stem)
    else:
        raise ConfigError(f"unknown plot kind {args.kind!r}")
    print(f"wrote {out}")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="landmarkseg",
        description="Landmark-based segmentation benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="JSON config file (flags override)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--force", action="store_true",
                       help="allow writing into a non-empty output directory")
        if data:
            p.add_argument("--data", required=True,
                           help="dataset manifest.json or its directory")
            p.add_argument("--split", default="all",
                           choices=("all", "train", "val", "test"))
            p.add_argument("--split-seed", type=int, default=0)

    p = sub.add_parser("gen-data", help="generate a synthetic paired dataset")
    p.add_argument("--spec", help="generation spec JSON")
    p.add_argument("-n", "--num-samples", type=int, required=True)
    common(p, data=False)
    # distinguish "no --seed" (keep the spec's seed) from an explicit 0
    p.set_defaults(func=cmd_gen_data, seed=None)

    p = sub.add_parser("pretrain", help="pretrain an image or graph VAE")
    p.add_argument("--kind", required=True, choices=("image-vae", "graph-vae"))
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--mask-input", action="store_true",
                   help="train on masks rendered as grayscale inputs")
    common(p)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train-hybrid", help="couple and fine-tune the hybrid model")
    p.add_argument("--variant", default="plain",
                   choices=("plain", "dual", "dual-sc"))
    p.add_argument("--image-vae", help="pretrained image VAE checkpoint")
    p.add_argument("--graph-vae", help="pretrained graph VAE checkpoint")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--mask-input", action="store_true")
    common(p)
    p.set_defaults(func=cmd_train_hybrid)

    p = sub.add_parser("train-baseline", help="train a baseline model")
    p.add_argument("--kind", required=True, choices=("pca", "fc-vae", "unet"))
    p.add_argument("--image-vae", help="pretrained image VAE checkpoint")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--pretrain-epochs", dest="pretrain_epochs", type=int)
    p.add_argument("--n-modes", type=int, default=None)
    p.add_argument("--mask-input", action="store_true")
    common(p)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("experiment1", help="landmark segmentation benchmark")
    p.add_argument("--model", action="append", default=[],
                   metavar="NAME=CKPT")
    p.add_argument("--overlays", type=int, default=6)
    p.add_argument("--spacing", type=float, default=None,
                   help="pixel spacing in mm (default 1.0)")
    common(p)
    p.set_defaults(func=cmd_experiment1, split="test")

    p = sub.add_parser("experiment2",
                       help="landmark extraction from dense masks")
    p.add_argument("--model", action="append", default=[],
                   metavar="NAME=CKPT")
    p.add_argument("--overlays", type=int, default=6)
    p.add_argument("--spacing", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_experiment2, split="test")

    p = sub.add_parser("experiment3", help="occlusion robustness sweep")
    p.add_argument("--dual", required=True, help="dual hybrid checkpoint")
    p.add_argument("--unet", required=True, help="unet checkpoint")
    p.add_argument("--box-fracs", default="0,0.125,0.25,0.375,0.5")
    p.add_argument("--spacing", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_experiment3, split="test")

    p = sub.add_parser("plot", help="render an SVG plot from a metrics CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", default="line", choices=("line", "box"))
    p.add_argument("--x", help="x column (line)")
    p.add_argument("--y", help="y column (line)")
    p.add_argument("--value", help="value column (box)")
    p.add_argument("--group", help="grouping column")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output SVG path")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LandmarkSegError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: missing file: {err.filename or err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
