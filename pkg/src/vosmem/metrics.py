"""Segmentation quality metrics over binary pixel sets.

Pixel sets are plain 2-D boolean arrays. The suite covers region overlap
(Jaccard/IoU and Dice), boundary agreement (F measure after dilating both
boundaries with a disk), their J&F average, and a sequence-level IoU that
accumulates intersections and unions over all frames of an object before
dividing (frames are disjoint time slabs of one spatiotemporal volume, so
the accumulated form equals the 3-D IoU of the stacked masks).

Conventions for degenerate inputs: when prediction and ground truth are
both empty the overlap metrics return 1 (nothing was missed and nothing
was hallucinated); when exactly one side is empty they return 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.ndimage import binary_dilation

from .core import FrameSequence, LabelMask

DEFAULT_BOUNDARY_RADIUS = 14
METRIC_NAMES = ("J&F", "J", "F", "Dice", "CIoU")


def _as_pixel_set(mask) -> np.ndarray:
    arr = np.asarray(mask, dtype=bool)
    if arr.ndim != 2:
        raise ValueError(f"pixel set must be 2-D, got {arr.ndim}-D")
    return arr


def _check_same_shape(p: np.ndarray, g: np.ndarray) -> None:
    if p.shape != g.shape:
        raise ValueError(f"pixel sets differ in shape: {p.shape} vs {g.shape}")


def jaccard(pred, gt) -> float:
    """Region overlap |P & G| / |P | G|; 1.0 when both sets are empty."""
    p = _as_pixel_set(pred)
    g = _as_pixel_set(gt)
    _check_same_shape(p, g)
    union = int(np.count_nonzero(p | g))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(p & g)) / union


def dice(pred, gt) -> float:
    """Overlap 2|P & G| / (|P| + |G|); 1.0 when both sets are empty."""
    p = _as_pixel_set(pred)
    g = _as_pixel_set(gt)
    _check_same_shape(p, g)
    total = int(np.count_nonzero(p)) + int(np.count_nonzero(g))
    if total == 0:
        return 1.0
    return 2 * int(np.count_nonzero(p & g)) / total


def boundary_pixels(mask) -> np.ndarray:
    """Member pixels with a 4-connected neighbor that is a non-member or
    lies outside the image (the image border counts as exterior)."""
    m = _as_pixel_set(mask)
    h, w = m.shape
    interior = np.zeros_like(m)
    if h > 2 and w > 2:
        interior[1:-1, 1:-1] = (m[:-2, 1:-1] & m[2:, 1:-1] & m[1:-1, :-2] & m[1:-1, 2:])
    return m & ~interior


def disk_footprint(radius: int) -> np.ndarray:
    """Integer Euclidean ball: offsets (dy, dx) with dy^2 + dx^2 <= radius^2."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    yy, xx = np.ogrid[-radius:radius + 1, -radius:radius + 1]
    return yy * yy + xx * xx <= radius * radius


def dilate_disk(pixels, radius: int) -> np.ndarray:
    """Dilate a pixel set by the disk of the given radius, clipped to the image."""
    m = _as_pixel_set(pixels)
    if radius == 0:
        return m.copy()
    return binary_dilation(m, structure=disk_footprint(radius))


def boundary_f(pred, gt, radius: int = DEFAULT_BOUNDARY_RADIUS) -> float:
    """Boundary F measure: harmonic mean of boundary precision and recall.

    Precision is the fraction of predicted boundary pixels within the
    dilated ground-truth boundary; recall is the fraction of ground-truth
    boundary pixels within the dilated predicted boundary. Both boundaries
    empty -> 1.0; exactly one empty -> 0.0; precision + recall == 0 -> 0.0.
    """
    p = _as_pixel_set(pred)
    g = _as_pixel_set(gt)
    _check_same_shape(p, g)
    bp = boundary_pixels(p)
    bg = boundary_pixels(g)
    np_b = int(np.count_nonzero(bp))
    ng_b = int(np.count_nonzero(bg))
    if np_b == 0 and ng_b == 0:
        return 1.0
    if np_b == 0 or ng_b == 0:
        return 0.0
    precision = int(np.count_nonzero(bp & dilate_disk(bg, radius))) / np_b
    recall = int(np.count_nonzero(bg & dilate_disk(bp, radius))) / ng_b
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def j_and_f(j: float, f: float) -> float:
    """Arithmetic mean of region similarity J and boundary accuracy F."""
    if not 0.0 <= j <= 1.0:
        raise ValueError(f"J must be in [0, 1], got {j}")
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"F must be in [0, 1], got {f}")
    return (j + f) / 2.0


def ciou(pred_seq: Sequence, gt_seq: Sequence) -> float:
    """Sequence-level IoU: sum of per-frame intersections over sum of
    per-frame unions; 1.0 when every frame pair is empty."""
    if len(pred_seq) != len(gt_seq):
        raise ValueError(
            f"sequence lengths differ: {len(pred_seq)} vs {len(gt_seq)}")
    inter = 0
    union = 0
    for pred, gt in zip(pred_seq, gt_seq):
        p = _as_pixel_set(pred)
        g = _as_pixel_set(gt)
        _check_same_shape(p, g)
        inter += int(np.count_nonzero(p & g))
        union += int(np.count_nonzero(p | g))
    if union == 0:
        return 1.0
    return inter / union


@dataclass(frozen=True)
class AggregateStat:
    mean: float
    sd: float


@dataclass(frozen=True)
class MetricReport:
    """Per-object means, optional per-frame rows, and cross-object stats.

    per_object maps object id -> {metric name: value}; aggregate maps
    metric name -> mean and sample standard deviation over objects (sd is
    0.0 when only one object is present). All values are fractions in
    [0, 1]; formatting as percentages happens at presentation time.
    """

    per_object: dict[int, dict[str, float]]
    aggregate: dict[str, AggregateStat]
    per_frame: dict[int, list[dict[str, float]]]
    radius: int

    def to_dict(self, include_per_frame: bool = False) -> dict:
        out = {
            "radius": self.radius,
            "per_object": {
                str(oid): {k: float(v) for k, v in vals.items()}
                for oid, vals in self.per_object.items()
            },
            "aggregate": {
                k: {"mean": float(s.mean), "sd": float(s.sd)}
                for k, s in self.aggregate.items()
            },
        }
        if include_per_frame:
            out["per_frame"] = {
                str(oid): [{k: (float(v) if k != "frame_index" else int(v))
                            for k, v in row.items()} for row in rows]
                for oid, rows in self.per_frame.items()
            }
        return out

    def format_table(self) -> str:
        """Aligned table of percentages, mean+/-sd on the aggregate row."""
        names = [n for n in METRIC_NAMES if n in self.aggregate]
        header = ["object"] + [f"{n}[%]" for n in names]
        rows = [header]
        for oid in sorted(self.per_object):
            vals = self.per_object[oid]
            rows.append([str(oid)] + [f"{100.0 * vals[n]:.2f}" for n in names])
        agg = ["mean"] + [
            f"{100.0 * self.aggregate[n].mean:.2f}±{100.0 * self.aggregate[n].sd:.2f}"
            for n in names
        ]
        rows.append(agg)
        widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
                 for row in rows]
        return "\n".join(lines)


def _check_aligned(pred: FrameSequence, gt: FrameSequence) -> None:
    if len(pred) != len(gt):
        raise ValueError(f"sequence lengths differ: {len(pred)} vs {len(gt)}")
    if pred.spatial_shape != gt.spatial_shape:
        raise ValueError(
            f"spatial dimensions differ: {pred.spatial_shape} vs {gt.spatial_shape}")
    if pred.frame_indices != gt.frame_indices:
        raise ValueError("prediction and ground truth frame indices are not aligned")


def evaluate(pred: FrameSequence, gt: FrameSequence,
             radius: int = DEFAULT_BOUNDARY_RADIUS,
             metrics: Sequence[str] = METRIC_NAMES,
             object_ids: Sequence[int] | None = None) -> MetricReport:
    """Score aligned mask sequences per object id and aggregate over objects.

    Masks are binarized per object id before any metric; background is
    never scored. Ids default to every id present in the ground truth;
    explicitly requested ids must appear in at least one ground-truth
    frame. J, F, and Dice are per-frame values averaged over the sequence;
    the sequence-level IoU accumulates counts over all frames first.
    """
    _check_aligned(pred, gt)
    requested = list(metrics)
    unknown = [m for m in requested if m not in METRIC_NAMES]
    if unknown:
        raise ValueError(f"unknown metrics {unknown}, expected a subset of {METRIC_NAMES}")

    gt_ids = sorted({i for frame in gt for i in frame.object_ids()})
    if object_ids is None:
        ids = gt_ids
        if not ids:
            raise ValueError("ground truth contains no objects")
    else:
        ids = sorted(int(i) for i in object_ids)
        missing = [i for i in ids if i not in gt_ids]
        if missing:
            raise ValueError(f"object ids {missing} absent from every ground-truth frame")

    need_j = bool({"J", "J&F"} & set(requested))
    need_f = bool({"F", "J&F"} & set(requested))

    per_object: dict[int, dict[str, float]] = {}
    per_frame: dict[int, list[dict[str, float]]] = {}
    for oid in ids:
        rows = []
        inter = 0
        union = 0
        for pf, gf in zip(pred, gt):
            p = pf.binarize(oid)
            g = gf.binarize(oid)
            row: dict[str, float] = {"frame_index": pf.frame_index}
            if need_j:
                row["J"] = jaccard(p, g)
            if need_f:
                row["F"] = boundary_f(p, g, radius)
            if "Dice" in requested:
                row["Dice"] = dice(p, g)
            inter += int(np.count_nonzero(p & g))
            union += int(np.count_nonzero(p | g))
            rows.append(row)
        per_frame[oid] = rows
        mean_j = float(np.mean([r["J"] for r in rows])) if need_j else 0.0
        mean_f = float(np.mean([r["F"] for r in rows])) if need_f else 0.0
        computed = {
            "J&F": (lambda: j_and_f(mean_j, mean_f)),
            "J": (lambda: mean_j),
            "F": (lambda: mean_f),
            "Dice": (lambda: float(np.mean([r["Dice"] for r in rows]))),
            "CIoU": (lambda: 1.0 if union == 0 else inter / union),
        }
        # canonical key order keeps serialized reports byte-stable
        per_object[oid] = {name: computed[name]()
                           for name in METRIC_NAMES if name in requested}

    aggregate: dict[str, AggregateStat] = {}
    for name in METRIC_NAMES:
        if name not in requested:
            continue
        values = np.array([per_object[oid][name] for oid in ids], dtype=np.float64)
        sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        aggregate[name] = AggregateStat(mean=float(values.mean()), sd=sd)

    return MetricReport(per_object=per_object, aggregate=aggregate,
                        per_frame=per_frame, radius=radius)
