"""Point-cloud I/O (PLY subset), normalized features, and k-means seeding.

The reader accepts ASCII and binary little-endian PLY files whose first
element is `vertex` with scalar x, y, z properties and optional
red/green/blue. The writer emits double-precision positions so binary
round trips preserve coordinates bit-exactly.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import FileFormatError, InvalidArgumentError, InvalidDataError
from ..features import kmeans
from ..pipeline import Partition
from .image import label_palette

__all__ = [
    "PointCloud",
    "load_pointcloud",
    "write_pointcloud",
    "write_labeled_pointcloud",
    "pointcloud_features",
    "initial_partition_pointcloud",
]

_PLY_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "<i2", "int16": "<i2",
    "ushort": "<u2", "uint16": "<u2",
    "int": "<i4", "int32": "<i4",
    "uint": "<u4", "uint32": "<u4",
    "float": "<f4", "float32": "<f4",
    "double": "<f8", "float64": "<f8",
}


@dataclass(frozen=True)
class PointCloud:
    """Positions (n, 3) float64 plus optional per-point uint8 colors."""

    positions: np.ndarray
    colors: np.ndarray | None = None

    def __post_init__(self):
        positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        if positions.ndim != 2 or positions.shape[1] != 3 or positions.shape[0] < 1:
            raise InvalidArgumentError("positions must be a non-empty (n, 3) array")
        if not np.all(np.isfinite(positions)):
            raise InvalidDataError("positions contain non-finite values")
        object.__setattr__(self, "positions", positions)
        if self.colors is not None:
            colors = np.ascontiguousarray(self.colors, dtype=np.uint8)
            if colors.shape != (positions.shape[0], 3):
                raise InvalidArgumentError("colors must be (n, 3) to match positions")
            object.__setattr__(self, "colors", colors)

    @property
    def n_points(self):
        return self.positions.shape[0]


def _read_header(fh, path):
    def next_line():
        raw = fh.readline()
        if not raw:
            raise FileFormatError(f"{path}: header ended unexpectedly")
        try:
            return raw.decode("ascii").strip()
        except UnicodeDecodeError as exc:
            raise FileFormatError(f"{path}: header is not ASCII") from exc

    if next_line() != "ply":
        raise FileFormatError(f"{path}: missing 'ply' magic line")
    fmt = None
    elements = []
    while True:
        line = next_line()
        if line == "end_header":
            break
        if not line or line.startswith(("comment", "obj_info")):
            continue
        tokens = line.split()
        if tokens[0] == "format":
            if len(tokens) != 3 or tokens[2] != "1.0":
                raise FileFormatError(f"{path}: malformed format line {line!r}")
            if tokens[1] not in ("ascii", "binary_little_endian"):
                raise FileFormatError(f"{path}: unsupported format {tokens[1]!r}")
            fmt = tokens[1]
        elif tokens[0] == "element":
            if len(tokens) != 3 or not tokens[2].isdigit():
                raise FileFormatError(f"{path}: malformed element line {line!r}")
            elements.append({"name": tokens[1], "count": int(tokens[2]), "properties": []})
        elif tokens[0] == "property":
            if not elements:
                raise FileFormatError(f"{path}: property before any element")
            if tokens[1] == "list":
                elements[-1]["properties"].append(("list", tokens[-1]))
            elif len(tokens) == 3:
                elements[-1]["properties"].append((tokens[1], tokens[2]))
            else:
                raise FileFormatError(f"{path}: malformed property line {line!r}")
        else:
            raise FileFormatError(f"{path}: unrecognized header line {line!r}")
    if fmt is None:
        raise FileFormatError(f"{path}: header has no format line")
    if not elements:
        raise FileFormatError(f"{path}: header declares no elements")
    return fmt, elements


def load_pointcloud(path):
    """Read a PLY file whose first element is vertex with x, y, z."""
    with open(path, "rb") as fh:
        fmt, elements = _read_header(fh, path)
        vertex = elements[0]
        if vertex["name"] != "vertex":
            raise FileFormatError(f"{path}: first element must be vertex, got {vertex['name']!r}")
        names = [name for _, name in vertex["properties"]]
        for axis in ("x", "y", "z"):
            if axis not in names:
                raise FileFormatError(f"{path}: vertex element lacks property {axis!r}")
        if any(ptype == "list" for ptype, _ in vertex["properties"]):
            raise FileFormatError(f"{path}: list properties on vertex are not supported")
        for ptype, name in vertex["properties"]:
            if ptype not in _PLY_TYPES:
                raise FileFormatError(f"{path}: unknown property type {ptype!r} for {name!r}")
        n = vertex["count"]
        if n < 1:
            raise FileFormatError(f"{path}: vertex count must be at least 1")

        if fmt == "binary_little_endian":
            dtype = np.dtype([(name, _PLY_TYPES[ptype]) for ptype, name in vertex["properties"]])
            raw = fh.read(dtype.itemsize * n)
            if len(raw) != dtype.itemsize * n:
                raise FileFormatError(f"{path}: file truncated inside vertex data")
            table = np.frombuffer(raw, dtype=dtype)
        else:
            rows = []
            while len(rows) < n:
                raw = fh.readline()
                if not raw:
                    raise FileFormatError(f"{path}: file truncated inside vertex data")
                line = raw.decode("ascii", errors="replace").strip()
                if line:
                    rows.append(line.split())
            if any(len(row) != len(names) for row in rows):
                raise FileFormatError(f"{path}: vertex line has wrong token count")
            try:
                matrix = np.array(rows, dtype=np.float64)
            except ValueError as exc:
                raise FileFormatError(f"{path}: non-numeric vertex data: {exc}") from exc
            table = {name: matrix[:, i] for i, name in enumerate(names)}

    positions = np.stack(
        [np.asarray(table["x"], np.float64), np.asarray(table["y"], np.float64), np.asarray(table["z"], np.float64)],
        axis=1,
    )
    colors = None
    if all(c in names for c in ("red", "green", "blue")):
        colors = np.stack(
            [np.asarray(table[c]).astype(np.uint8) for c in ("red", "green", "blue")], axis=1
        )
    try:
        return PointCloud(positions=positions, colors=colors)
    except InvalidDataError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def write_pointcloud(path, cloud, binary=True):
    """Write positions (double precision) and any colors to a PLY file."""
    if not isinstance(cloud, PointCloud):
        raise InvalidArgumentError("cloud must be a PointCloud")
    n = cloud.n_points
    header = ["ply"]
    header.append("format binary_little_endian 1.0" if binary else "format ascii 1.0")
    header.append(f"element vertex {n}")
    header += ["property double x", "property double y", "property double z"]
    if cloud.colors is not None:
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    header.append("end_header")

    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
            if cloud.colors is not None:
                fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
            table = np.empty(n, dtype=np.dtype(fields))
            table["x"], table["y"], table["z"] = cloud.positions.T
            if cloud.colors is not None:
                table["red"], table["green"], table["blue"] = cloud.colors.T
            fh.write(table.tobytes())
        else:
            for i in range(n):
                row = [repr(float(v)) for v in cloud.positions[i]]
                if cloud.colors is not None:
                    row += [str(int(v)) for v in cloud.colors[i]]
                fh.write((" ".join(row) + "\n").encode("ascii"))


def write_labeled_pointcloud(path, cloud, labels, binary=True):
    """Write the cloud with one stable palette color per cluster id."""
    labels = np.asarray(labels)
    if labels.shape != (cloud.n_points,) or not np.issubdtype(labels.dtype, np.integer):
        raise InvalidArgumentError("labels must be one integer per point")
    if labels.min() < 0:
        raise InvalidArgumentError("labels must be non-negative")
    palette = label_palette(int(labels.max()) + 1)
    write_pointcloud(path, PointCloud(positions=cloud.positions, colors=palette[labels]), binary=binary)


def _center_and_scale(block):
    center = block.mean(axis=0)
    centered = block - center
    scale = float(np.sqrt((centered * centered).mean()))
    if scale == 0.0:
        scale = 1.0
    return centered / scale, center, scale


def pointcloud_features(cloud, use_colors=True):
    """Normalized per-point feature rows plus the recorded parameters.

    Positions are centered per axis and divided by one RMS scale;
    colors, when present and requested, get the same treatment as a
    block. Returns (features, params) where params holds the centers
    and scales needed to reproduce the transform.
    """
    if not isinstance(cloud, PointCloud):
        raise InvalidArgumentError("cloud must be a PointCloud")
    pos, center, scale = _center_and_scale(cloud.positions)
    params = {"position_center": center.tolist(), "position_scale": scale}
    blocks = [pos]
    if use_colors and cloud.colors is not None:
        col, ccenter, cscale = _center_and_scale(cloud.colors.astype(np.float64))
        params["color_center"] = ccenter.tolist()
        params["color_scale"] = cscale
        blocks.append(col)
    return np.hstack(blocks), params


def initial_partition_pointcloud(cloud, n_clusters, seed):
    """Level-0 partition from seeded k-means on the normalized features."""
    features, _ = pointcloud_features(cloud)
    sub = kmeans(features, n_clusters, seed=seed)
    return Partition.from_labels(sub.assignments)
