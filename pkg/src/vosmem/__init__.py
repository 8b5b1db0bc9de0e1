"""Streaming memory management and evaluation for promptable video object segmentation.

The package provides four pieces that plug together but stand alone:

* :mod:`vosmem.sampling` — multi-rate temporal index plans for stride
  augmentation of annotated clips;
* :mod:`vosmem.memory` — a fixed-capacity FIFO memory bank with
  short/long-term splitting and per-group redundancy pruning under six
  similarity metrics;
* :mod:`vosmem.metrics` — region (J, Dice), boundary (F), combined (J&F)
  and sequence-level (CIoU) segmentation measures with per-object reports;
* :mod:`vosmem.harness` — a deterministic synthetic tracker that exercises
  the full encode/prune/readout/append loop without any neural network.

:mod:`vosmem.io` and :mod:`vosmem.cli` add on-disk formats and the
``vosmem`` command with ``sample``/``prune``/``eval``/``simulate``.
"""

from .core import (
    MAX_OBJECT_ID,
    FeatureMap,
    FrameSequence,
    LabelMask,
    approx_equal,
    make_feature_map,
)
from .harness import (
    ENCODER_CHANNELS,
    OBJECT_ID,
    OBJECT_SHAPES,
    SceneConfig,
    ToyEncoderConfig,
    TrackStep,
    TrackTrace,
    encode_frame,
    generate_scene,
    readout_cost,
    track_sequence,
)
from .memory import (
    DEFAULT_CAPACITY,
    DEFAULT_METRIC,
    DEFAULT_MODE,
    PRUNE_MODES,
    SIMILARITY_METRICS,
    MemoryBank,
    MemoryEntry,
    MemoryGroup,
    PruneOutcome,
    redundancy_scores,
    similarity,
)
from .metrics import (
    DEFAULT_BOUNDARY_RADIUS,
    METRIC_NAMES,
    AggregateStat,
    MetricReport,
    boundary_f,
    boundary_pixels,
    ciou,
    dice,
    dilate_disk,
    disk_footprint,
    evaluate,
    j_and_f,
    jaccard,
)
from .sampling import (
    DEFAULT_STRIDES,
    PHASE_POLICIES,
    SamplingConfig,
    SamplingPlan,
    SamplingView,
    build_plan,
    materialize,
    sample_indices,
)

__version__ = "0.1.0"

__all__ = [
    "MAX_OBJECT_ID",
    "FeatureMap",
    "FrameSequence",
    "LabelMask",
    "approx_equal",
    "make_feature_map",
    "ENCODER_CHANNELS",
    "OBJECT_ID",
    "OBJECT_SHAPES",
    "SceneConfig",
    "ToyEncoderConfig",
    "TrackStep",
    "TrackTrace",
    "encode_frame",
    "generate_scene",
    "readout_cost",
    "track_sequence",
    "DEFAULT_CAPACITY",
    "DEFAULT_METRIC",
    "DEFAULT_MODE",
    "PRUNE_MODES",
    "SIMILARITY_METRICS",
    "MemoryBank",
    "MemoryEntry",
    "MemoryGroup",
    "PruneOutcome",
    "redundancy_scores",
    "similarity",
    "DEFAULT_BOUNDARY_RADIUS",
    "METRIC_NAMES",
    "AggregateStat",
    "MetricReport",
    "boundary_f",
    "boundary_pixels",
    "ciou",
    "dice",
    "dilate_disk",
    "disk_footprint",
    "evaluate",
    "j_and_f",
    "jaccard",
    "DEFAULT_STRIDES",
    "PHASE_POLICIES",
    "SamplingConfig",
    "SamplingPlan",
    "SamplingView",
    "build_plan",
    "materialize",
    "sample_indices",
    "__version__",
]
