"""Python bindings for the lsmvos C++ core.

Arrays are float32 C×H×W tensors, uint8 H×W label maps, and uint8 H×W×3
frames. Matching functions return ``(similarity, source)`` pairs; pass both
back to the matching backward functions.
"""

from ._lsmvos import *  # noqa: F401,F403
from ._lsmvos import (
    ConfigError,
    Error,
    IoError,
    Model,
    ShapeError,
    Weights,
)

__all__ = [
    "ConfigError",
    "Error",
    "IoError",
    "Model",
    "ShapeError",
    "Weights",
    "bilinear_resize",
    "contour_accuracy",
    "conv2d",
    "downsample_mask",
    "focal_loss",
    "l2_normalize_channels",
    "load_weights",
    "long_term_match",
    "long_term_match_backward",
    "merge_objects",
    "num_threads",
    "read_image",
    "read_label_map",
    "region_similarity",
    "run_sequence",
    "save_weights",
    "seeded_init",
    "sequence_stats",
    "set_num_threads",
    "short_term_match",
    "short_term_match_backward",
    "synthetic_clip",
    "topk_per_position",
    "write_label_map",
]
