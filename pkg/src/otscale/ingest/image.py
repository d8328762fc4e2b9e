"""8-bit RGB image I/O, label colorization, and pixel feature matrices."""

import colorsys

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import FileFormatError, InvalidArgumentError

__all__ = [
    "load_image",
    "write_image",
    "label_palette",
    "write_label_image",
    "image_features",
]


def load_image(path):
    """Load any common raster file as an (H, W, 3) uint8 RGB array."""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise FileFormatError(f"cannot decode image {path}: {exc}") from exc


def _validate_rgb(image):
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.shape[0] < 1 or image.shape[1] < 1:
        raise InvalidArgumentError(f"expected an (H, W, 3) image, got shape {image.shape}")
    return image


def write_image(path, image):
    image = _validate_rgb(image)
    if image.dtype != np.uint8:
        raise InvalidArgumentError("image must be uint8")
    Image.fromarray(image, mode="RGB").save(path, format="PNG")


def label_palette(n):
    """n visually spread, deterministic RGB colors, one per cluster id.

    Hues advance by the golden ratio so nearby ids get distant colors;
    the same id always maps to the same color.
    """
    if n < 1:
        raise InvalidArgumentError("palette needs at least one color")
    colors = np.empty((n, 3), np.uint8)
    for i in range(n):
        hue = (i * 0.6180339887498949) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, 0.65, 0.95)
        colors[i] = (round(r * 255), round(g * 255), round(b * 255))
    return colors


def write_label_image(path, labels):
    """Colorize an (H, W) dense label grid and save it as a PNG."""
    labels = np.asarray(labels)
    if labels.ndim != 2 or not np.issubdtype(labels.dtype, np.integer):
        raise InvalidArgumentError("labels must be a 2-D integer grid")
    if labels.min() < 0:
        raise InvalidArgumentError("labels must be non-negative")
    palette = label_palette(int(labels.max()) + 1)
    write_image(path, palette[labels])


def image_features(image, spatial_weight=0.0):
    """Per-pixel feature rows in image scan order.

    Columns are the raw color channels as floats; with a positive
    spatial_weight two more columns carry (weight * y, weight * x) in
    pixel units, letting cluster signatures see position as well as
    color.
    """
    image = _validate_rgb(image)
    if spatial_weight < 0.0:
        raise InvalidArgumentError("spatial_weight must be non-negative")
    h, w = image.shape[:2]
    color = image.reshape(-1, 3).astype(np.float64)
    if spatial_weight == 0.0:
        return color
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    return np.hstack([color, spatial_weight * yy.reshape(-1, 1), spatial_weight * xx.reshape(-1, 1)])
