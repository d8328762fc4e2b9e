"""Command-line front-end: reproducible multilevel clustering runs.

Each run resolves its settings from built-in defaults, then an optional
JSON config file, then explicit flags (later sources win), executes the
pipeline, and writes its artifacts plus a run manifest. The manifest
embeds the fully resolved config (including the derived schedule), so
feeding it back through --config reproduces the run byte-identically.

Exit codes: 0 success, 1 usage (bad flags, invalid parameters or
schedules), 2 data (unreadable or malformed inputs), 3 numerical.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, accel
from .errors import (
    FileFormatError,
    InvalidArgumentError,
    InvalidDataError,
    InvalidScheduleError,
    NumericalFailureError,
)
from .ingest import (
    image_features,
    initial_partition_pointcloud,
    load_image,
    load_labelmap,
    load_pointcloud,
    pointcloud_features,
    save_labelmap,
    slic,
    write_label_image,
    write_labeled_pointcloud,
)
from .metrics import write_metrics_csv
from .pipeline import (
    CoarsenConfig,
    Hierarchy,
    build_hierarchy,
    derive_seed,
    geometric_schedule,
)

_THREADS_ENV = "OTSCALE_THREADS"

_COMMON_DEFAULTS = {
    "input": None,
    "out": None,
    "seed": 0,
    "threads": None,
    "kmax": 8,
    "representative": "mean",
    "alpha_policy": "order-statistic",
    "alpha_k": None,
    "kernel": "gaussian",
    "weight_mode": "kernel",
    "schedule": None,
    "levels": None,
    "clusters_final": None,
    "export_matrices": False,
}

_DEFAULTS = {
    "segment-image": {
        **_COMMON_DEFAULTS,
        "levels": 4,
        "clusters_final": 10,
        "superpixels": 256,
        "compactness": 10.0,
        "slic_iterations": 10,
        "slic_min_size": None,
        "color_space": "rgb",
        "spatial_weight": 0.0,
    },
    "segment-cloud": {
        **_COMMON_DEFAULTS,
        "levels": 3,
        "clusters_final": 10,
        "init_clusters": 64,
        "ignore_colors": False,
    },
    "coarsen": {**_COMMON_DEFAULTS, "features": None},
    "metrics": {"input": None, "out": None, "image": None, "cloud": None, "features": None},
}


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1, not argparse's default 2 (2 means bad data here).
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_pipeline_flags(p):
    p.add_argument("--config", help="JSON config file or a previous run manifest")
    p.add_argument("--input", help="input file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--threads", type=int, help=f"worker threads (default ${_THREADS_ENV} or 1)")
    p.add_argument("--kmax", type=int, help="max sub-clusters per signature (default 8)")
    p.add_argument("--representative", choices=["mean", "medoid"], help="sub-cluster representative")
    p.add_argument(
        "--alpha-policy",
        choices=["order-statistic", "fixed-k", "mean-distance"],
        help="neighbor threshold rule (default order-statistic)",
    )
    p.add_argument("--alpha-k", type=int, help="k for the fixed-k alpha policy")
    p.add_argument("--kernel", choices=["gaussian", "uniform"], help="edge weight kernel")
    p.add_argument(
        "--weight-mode",
        choices=["kernel", "literal-distance"],
        help="kernel weights or raw distances on edges",
    )
    p.add_argument("--schedule", help="comma-separated cluster counts per level, e.g. 64,16,4")
    p.add_argument("--levels", type=int, help="number of coarsening levels")
    p.add_argument("--clusters-final", type=int, help="cluster count at the last level")
    p.add_argument(
        "--export-matrices",
        action="store_true",
        default=None,
        help="store per-level distance/adjacency matrices in the hierarchy file",
    )


def build_parser():
    parser = _Parser(prog="otscale", description="Multilevel transport-based graph clustering.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment-image", help="superpixel init + multilevel clustering of an image")
    _add_pipeline_flags(p)
    p.add_argument("--superpixels", type=int, help="initial superpixel count (default 256)")
    p.add_argument("--compactness", type=float, help="superpixel spatial weight (default 10)")
    p.add_argument("--slic-iterations", type=int, help="superpixel sweeps (default 10)")
    p.add_argument("--slic-min-size", type=int, help="min superpixel fragment size kept")
    p.add_argument("--color-space", choices=["rgb", "lab"], help="superpixel color space")
    p.add_argument(
        "--spatial-weight", type=float, help="weight of pixel coordinates in cluster features"
    )

    p = sub.add_parser("segment-cloud", help="k-means init + multilevel clustering of a point cloud")
    _add_pipeline_flags(p)
    p.add_argument("--init-clusters", type=int, help="initial cluster count (default 64)")
    p.add_argument(
        "--ignore-colors",
        action="store_true",
        default=None,
        help="cluster on positions even when the cloud has colors",
    )

    p = sub.add_parser("coarsen", help="coarsen an existing label map over a feature matrix")
    _add_pipeline_flags(p)
    p.add_argument("--features", help="feature matrix file (.npy or .csv), one row per node")

    p = sub.add_parser("metrics", help="recompute the metric table of a saved hierarchy")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.add_argument("--input", help="hierarchy JSON file")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--image", help="image file supplying per-node colors")
    p.add_argument("--cloud", help="PLY file supplying per-node colors")
    p.add_argument("--features", help="feature file (.npy/.csv) supplying per-node channels")
    return parser


def _load_config_file(path, command, defaults):
    try:
        with open(path, "rb") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: config must be a JSON object")
    if isinstance(doc.get("config"), dict):
        # A previous run's manifest; reuse its embedded config.
        if doc.get("command") != command:
            raise InvalidArgumentError(
                f"{path} is a manifest for {doc.get('command')!r}, not {command!r}"
            )
        doc = doc["config"]
    unknown = sorted(set(doc) - set(defaults))
    if unknown:
        raise InvalidArgumentError(f"unknown config keys: {', '.join(unknown)}")
    return doc


def _resolve(args, command):
    defaults = _DEFAULTS[command]
    resolved = dict(defaults)
    if getattr(args, "config", None):
        resolved.update(_load_config_file(args.config, command, defaults))
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    if resolved.get("input") is None:
        raise InvalidArgumentError("--input is required")
    if resolved.get("out") is None:
        raise InvalidArgumentError("--out is required")
    return resolved


def _resolve_threads(resolved):
    threads = resolved.get("threads")
    if threads is None:
        env = os.environ.get(_THREADS_ENV)
        if env is not None:
            try:
                threads = int(env)
            except ValueError:
                raise InvalidArgumentError(f"${_THREADS_ENV} must be an integer, got {env!r}")
        else:
            threads = 1
    if threads < 1:
        raise InvalidArgumentError("thread count must be at least 1")
    resolved["threads"] = int(threads)
    return resolved["threads"]


def _resolve_schedule(resolved, n_start):
    spec = resolved.get("schedule")
    if spec is not None:
        if isinstance(spec, str):
            try:
                spec = [int(tok) for tok in spec.split(",") if tok.strip()]
            except ValueError:
                raise InvalidScheduleError(f"cannot parse schedule {resolved['schedule']!r}")
        schedule = [int(v) for v in spec]
    else:
        if resolved.get("levels") is None or resolved.get("clusters_final") is None:
            raise InvalidScheduleError("give --schedule, or both --levels and --clusters-final")
        schedule = geometric_schedule(n_start, resolved["clusters_final"], resolved["levels"])
    resolved["schedule"] = schedule
    return schedule


def _coarsen_config(resolved):
    return CoarsenConfig(
        kmax=resolved["kmax"],
        representative=resolved["representative"],
        alpha_policy=resolved["alpha_policy"],
        alpha_k=resolved["alpha_k"],
        kernel=resolved["kernel"],
        weight_mode=resolved["weight_mode"],
        n_jobs=resolved["threads"],
    )


def _write_manifest(outdir, command, resolved, derived):
    manifest = {
        "command": command,
        "config": resolved,
        "derived": {
            **derived,
            "backend": accel.BACKEND,
            "package_version": __version__,
        },
    }
    path = os.path.join(outdir, "run_manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_feature_file(path):
    if path.endswith(".npy"):
        try:
            features = np.load(path)
        except ValueError as exc:
            raise FileFormatError(f"{path}: not a valid .npy file: {exc}") from exc
    else:
        try:
            features = np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise FileFormatError(f"{path}: cannot parse CSV: {exc}") from exc
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise FileFormatError(f"{path}: expected a 2-D feature matrix, got shape {features.shape}")
    return features


def _cmd_segment_image(args):
    resolved = _resolve(args, "segment-image")
    _resolve_threads(resolved)
    image = load_image(resolved["input"])
    h, w = image.shape[:2]
    part = slic(
        image,
        resolved["superpixels"],
        compactness=resolved["compactness"],
        iterations=resolved["slic_iterations"],
        seed=derive_seed(resolved["seed"], "slic"),
        color_space=resolved["color_space"],
        min_size=resolved["slic_min_size"],
    )
    schedule = _resolve_schedule(resolved, part.n_clusters)
    features = image_features(image, resolved["spatial_weight"])
    hierarchy = build_hierarchy(
        features,
        part.labels,
        schedule,
        _coarsen_config(resolved),
        seed=resolved["seed"],
        keep_graphs=resolved["export_matrices"],
    )
    os.makedirs(resolved["out"], exist_ok=True)
    for level in range(hierarchy.n_levels):
        write_label_image(
            os.path.join(resolved["out"], f"level_{level:02d}.png"),
            hierarchy.labels_at(level).reshape(h, w),
        )
    hierarchy.save(
        os.path.join(resolved["out"], "hierarchy.json"),
        include_matrices=resolved["export_matrices"],
    )
    colors = image.reshape(-1, 3).astype(np.float64)
    write_metrics_csv(os.path.join(resolved["out"], "metrics.csv"), hierarchy, colors=colors)
    _write_manifest(
        resolved["out"],
        "segment-image",
        resolved,
        {"n_start": part.n_clusters, "n_base": h * w, "counts": hierarchy.counts,
         "image_height": h, "image_width": w},
    )
    print(f"{resolved['input']}: {part.n_clusters} superpixels -> levels {hierarchy.counts}")


def _cmd_segment_cloud(args):
    resolved = _resolve(args, "segment-cloud")
    _resolve_threads(resolved)
    cloud = load_pointcloud(resolved["input"])
    part = initial_partition_pointcloud(
        cloud, resolved["init_clusters"], seed=derive_seed(resolved["seed"], "init")
    )
    schedule = _resolve_schedule(resolved, part.n_clusters)
    features, norm_params = pointcloud_features(cloud, use_colors=not resolved["ignore_colors"])
    hierarchy = build_hierarchy(
        features,
        part.labels,
        schedule,
        _coarsen_config(resolved),
        seed=resolved["seed"],
        keep_graphs=resolved["export_matrices"],
    )
    os.makedirs(resolved["out"], exist_ok=True)
    for level in range(hierarchy.n_levels):
        write_labeled_pointcloud(
            os.path.join(resolved["out"], f"level_{level:02d}.ply"),
            cloud,
            hierarchy.labels_at(level),
        )
    hierarchy.save(
        os.path.join(resolved["out"], "hierarchy.json"),
        include_matrices=resolved["export_matrices"],
    )
    colors = cloud.colors.astype(np.float64) if cloud.colors is not None else None
    write_metrics_csv(os.path.join(resolved["out"], "metrics.csv"), hierarchy, colors=colors)
    _write_manifest(
        resolved["out"],
        "segment-cloud",
        resolved,
        {"n_start": part.n_clusters, "n_base": cloud.n_points, "counts": hierarchy.counts,
         "normalization": norm_params},
    )
    print(f"{resolved['input']}: {cloud.n_points} points -> levels {hierarchy.counts}")


def _cmd_coarsen(args):
    resolved = _resolve(args, "coarsen")
    _resolve_threads(resolved)
    if resolved["features"] is None:
        raise InvalidArgumentError("--features is required")
    part = load_labelmap(resolved["input"])
    features = _load_feature_file(resolved["features"])
    schedule = _resolve_schedule(resolved, part.n_clusters)
    hierarchy = build_hierarchy(
        features,
        part.labels,
        schedule,
        _coarsen_config(resolved),
        seed=resolved["seed"],
        keep_graphs=resolved["export_matrices"],
    )
    os.makedirs(resolved["out"], exist_ok=True)
    for level in range(hierarchy.n_levels):
        save_labelmap(
            os.path.join(resolved["out"], f"level_{level:02d}_labels.txt"),
            hierarchy.labels_at(level),
        )
    hierarchy.save(
        os.path.join(resolved["out"], "hierarchy.json"),
        include_matrices=resolved["export_matrices"],
    )
    write_metrics_csv(os.path.join(resolved["out"], "metrics.csv"), hierarchy)
    _write_manifest(
        resolved["out"],
        "coarsen",
        resolved,
        {"n_start": part.n_clusters, "n_base": part.labels.shape[0], "counts": hierarchy.counts},
    )
    print(f"{resolved['input']}: {part.n_clusters} clusters -> levels {hierarchy.counts}")


def _cmd_metrics(args):
    resolved = _resolve(args, "metrics")
    hierarchy = Hierarchy.load(resolved["input"])
    sources = [k for k in ("image", "cloud", "features") if resolved.get(k)]
    if len(sources) > 1:
        raise InvalidArgumentError(f"give at most one color source, got {', '.join(sources)}")
    colors = None
    if resolved.get("image"):
        colors = load_image(resolved["image"]).reshape(-1, 3).astype(np.float64)
    elif resolved.get("cloud"):
        cloud = load_pointcloud(resolved["cloud"])
        if cloud.colors is None:
            raise InvalidDataError(f"{resolved['cloud']} carries no colors")
        colors = cloud.colors.astype(np.float64)
    elif resolved.get("features"):
        colors = _load_feature_file(resolved["features"])
    write_metrics_csv(resolved["out"], hierarchy, colors=colors)
    print(f"{resolved['input']}: wrote {resolved['out']}")


_COMMANDS = {
    "segment-image": _cmd_segment_image,
    "segment-cloud": _cmd_segment_cloud,
    "coarsen": _cmd_coarsen,
    "metrics": _cmd_metrics,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
        return 0
    except (InvalidArgumentError, InvalidScheduleError) as exc:
        return _fail(exc, 1)
    except (InvalidDataError, OSError) as exc:
        return _fail(exc, 2)
    except NumericalFailureError as exc:
        return _fail(exc, 3)


def _fail(exc, code):
    print(f"error [{type(exc).__module__}.{type(exc).__name__}]: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
