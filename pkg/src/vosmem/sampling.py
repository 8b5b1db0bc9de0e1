"""Multi-rate temporal sampling: one clip becomes several stride views.

A view at stride s and phase t0 is the index sequence t0, t0+s, t0+2s, ...
up to the clip length. Stride 1 at phase 0 reproduces the clip; larger
strides simulate proportionally faster object motion. Plans carry index
sequences only, so downstream loaders can stream frames lazily.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import FrameSequence

PHASE_POLICIES = ("zero", "all")
DEFAULT_STRIDES = (1, 2)


@dataclass(frozen=True)
class SamplingConfig:
    """Stride set and phase policy for building a plan.

    phase_policy "zero" emits one view per stride starting at frame 0;
    "all" emits every phase 0..s-1 so the stride-s views partition the
    clip. max_frames, when set, truncates each view from the end.
    """

    strides: tuple[int, ...] = DEFAULT_STRIDES
    phase_policy: str = "zero"
    max_frames: int | None = None

    def __post_init__(self):
        strides = tuple(int(s) for s in self.strides)
        if not strides:
            raise ValueError("strides must be non-empty")
        if any(s < 1 for s in strides):
            raise ValueError(f"every stride must be >= 1, got {strides}")
        if len(set(strides)) != len(strides):
            raise ValueError(f"strides must be distinct, got {strides}")
        if self.phase_policy not in PHASE_POLICIES:
            raise ValueError(
                f"unknown phase policy {self.phase_policy!r}, expected one of {PHASE_POLICIES}")
        if self.max_frames is not None and self.max_frames < 1:
            raise ValueError(f"max_frames must be >= 1, got {self.max_frames}")
        object.__setattr__(self, "strides", strides)


@dataclass(frozen=True)
class SamplingView:
    stride: int
    phase: int
    indices: tuple[int, ...]


@dataclass(frozen=True)
class SamplingPlan:
    clip_length: int
    views: tuple[SamplingView, ...]

    def to_dict(self) -> dict:
        return {
            "clip_length": self.clip_length,
            "views": [
                {"stride": v.stride, "phase": v.phase, "indices": list(v.indices)}
                for v in self.views
            ],
        }


def sample_indices(length: int, stride: int, phase: int = 0) -> list[int]:
    """Arithmetic-progression frame indices phase, phase+stride, ... < length.

    Never empty: the phase itself is always included.
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if not 0 <= phase < length:
        raise ValueError(f"phase must be in [0, {length}), got {phase}")
    return list(range(phase, length, stride))


def build_plan(length: int, config: SamplingConfig = SamplingConfig()) -> SamplingPlan:
    """One view per (stride, phase) pair, ordered by (stride, phase).

    Phases at or beyond the clip length are skipped (a stride larger than
    the clip yields only the phases that exist).
    """
    if length < 1:
        raise ValueError(f"clip length must be >= 1, got {length}")
    views = []
    for s in sorted(config.strides):
        phases = range(min(s, length)) if config.phase_policy == "all" else (0,)
        for t0 in phases:
            indices = sample_indices(length, s, t0)
            if config.max_frames is not None:
                indices = indices[:config.max_frames]
            views.append(SamplingView(stride=s, phase=t0, indices=tuple(indices)))
    return SamplingPlan(clip_length=length, views=tuple(views))


def materialize(sequence: FrameSequence, indices) -> FrameSequence:
    """Extract the subsequence at the given positions, keeping original
    frame_index values on each frame."""
    n = len(sequence)
    for i in indices:
        if not 0 <= i < n:
            raise IndexError(f"index {i} out of bounds for sequence of length {n}")
    return FrameSequence(tuple(sequence.frames[i] for i in indices))
