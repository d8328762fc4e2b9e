"""Flat text label files: external segmenters' output as level-0 input.

Format: first line is the node count, then one integer label per line.
Labels are made dense (0-based, first-appearance order) on load, so any
segmenter's ids are accepted.
"""

import numpy as np

from ..errors import FileFormatError, InvalidArgumentError
from ..pipeline import Partition

__all__ = ["load_labelmap", "save_labelmap"]


def save_labelmap(path, labels):
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0 or not np.issubdtype(labels.dtype, np.integer):
        raise InvalidArgumentError("labels must be a non-empty 1-D integer array")
    with open(path, "w") as fh:
        fh.write(f"{labels.shape[0]}\n")
        for v in labels.tolist():
            fh.write(f"{v}\n")


def load_labelmap(path):
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise FileFormatError(f"{path}: empty label file")
    try:
        count = int(lines[0])
        labels = np.array([int(v) for v in lines[1:]], dtype=np.int64)
    except ValueError as exc:
        raise FileFormatError(f"{path}: non-integer content: {exc}") from exc
    if count < 1:
        raise FileFormatError(f"{path}: node count must be positive")
    if labels.shape[0] != count:
        raise FileFormatError(
            f"{path}: header says {count} labels but file has {labels.shape[0]}"
        )
    return Partition.from_labels(labels)
