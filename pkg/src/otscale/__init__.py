"""Multiscale graph clustering via optimal transport.

Builds a hierarchy of clusterings from an initial fine partition:
per-cluster k-means signatures, exact optimal-transport distances
between them, a variable-k nearest-neighbor graph, and normalized-cut
spectral clustering, repeated level by level. Includes image and point
cloud segmentation front-ends, evaluation metrics, and a CLI.
"""

__version__ = "0.1.0"
