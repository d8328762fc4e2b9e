"""Front-ends that turn images, point clouds, and label files into
feature matrices and level-0 partitions for the pipeline."""

from .image import (
    image_features,
    label_palette,
    load_image,
    write_image,
    write_label_image,
)
from .labelmap import load_labelmap, save_labelmap
from .pointcloud import (
    PointCloud,
    initial_partition_pointcloud,
    load_pointcloud,
    pointcloud_features,
    write_labeled_pointcloud,
)
from .slic import slic

__all__ = [
    "image_features",
    "label_palette",
    "load_image",
    "write_image",
    "write_label_image",
    "load_labelmap",
    "save_labelmap",
    "PointCloud",
    "initial_partition_pointcloud",
    "load_pointcloud",
    "pointcloud_features",
    "write_labeled_pointcloud",
    "slic",
]
