"""File formats and persistence: tensor container, PGM masks, JSON traces.

Two small on-disk formats keep the toolchain dependency-free:

* tensor files: magic ``FTEN``, version u16 LE, dtype code u8 (0 = float32,
  1 = float64), ndim u8, then ndim u32 LE dims and a row-major
  little-endian payload whose byte length must match the header exactly;
* mask files: binary PGM (``P5``) with maxval 255, one byte per pixel
  holding the object id; the filename stem encodes the frame index as
  leading decimal digits.

All writers are atomic (write to a temp file in the target directory,
then rename) and byte-reproducible: JSON keys are emitted in a fixed
order and no timestamps enter any payload.
"""

from __future__ import annotations

import json
import os
import re
import struct
import tempfile
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .core import FeatureMap, FrameSequence, LabelMask
from .harness import TrackTrace
from .memory import PruneOutcome

SCHEMA_VERSION = 1

TENSOR_MAGIC = b"FTEN"
TENSOR_VERSION = 1
_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODE_FOR_NAME = {"float32": 0, "float64": 1}


class TensorFormatError(ValueError):
    """Raised for malformed tensor files (bad magic, version, or payload)."""


class MaskFormatError(ValueError):
    """Raised for malformed mask files or inconsistent mask directories."""


# ---------------------------------------------------------------------------
# atomic writers


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via temp file + rename so readers never observe partial files."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# tensor container


def tensor_bytes(array: np.ndarray, dtype: str = "float64") -> bytes:
    """Serialize an array into the tensor container format."""
    if dtype not in _CODE_FOR_NAME:
        raise ValueError(f"unsupported dtype {dtype!r}, expected float32 or float64")
    code = _CODE_FOR_NAME[dtype]
    arr = np.ascontiguousarray(array, dtype=_DTYPE_CODES[code])
    header = struct.pack("<4sHBB", TENSOR_MAGIC, TENSOR_VERSION, code, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    return header + dims + arr.tobytes(order="C")


def parse_tensor_bytes(blob: bytes) -> np.ndarray:
    """Inverse of tensor_bytes; rejects bad magic, unknown versions or dtype
    codes, truncated headers, and payload/header size mismatches."""
    if len(blob) < 8:
        raise TensorFormatError(f"truncated tensor header: {len(blob)} bytes")
    magic, version, code, ndim = struct.unpack_from("<4sHBB", blob, 0)
    if magic != TENSOR_MAGIC:
        raise TensorFormatError(f"bad magic {magic!r}, expected {TENSOR_MAGIC!r}")
    if version != TENSOR_VERSION:
        raise TensorFormatError(f"unsupported version {version}, expected {TENSOR_VERSION}")
    if code not in _DTYPE_CODES:
        raise TensorFormatError(f"unknown dtype code {code}")
    dims_end = 8 + 4 * ndim
    if len(blob) < dims_end:
        raise TensorFormatError("truncated tensor header: dims missing")
    dims = struct.unpack_from(f"<{ndim}I", blob, 8)
    dtype = _DTYPE_CODES[code]
    payload = blob[dims_end:]
    count = int(np.prod(dims, dtype=np.int64))  # 1 for a 0-d tensor
    expected = count * dtype.itemsize
    if len(payload) != expected:
        raise TensorFormatError(
            f"payload holds {len(payload)} bytes but header dims {tuple(dims)} "
            f"require {expected}")
    return np.frombuffer(payload, dtype=dtype).reshape(dims).astype(np.float64)


def write_tensor(fmap: FeatureMap, path, dtype: str = "float64") -> None:
    atomic_write_bytes(path, tensor_bytes(fmap.data, dtype=dtype))


def read_tensor(path, frame_index: int | None = None) -> FeatureMap:
    """Read a 3-D tensor file as a FeatureMap.

    The container itself does not store a frame index; when none is given
    it is decoded from leading digits of the filename stem, defaulting to 0.
    """
    blob = Path(path).read_bytes()
    arr = parse_tensor_bytes(blob)
    if arr.ndim != 3:
        raise TensorFormatError(f"feature maps are 3-D, file holds a {arr.ndim}-D tensor")
    if frame_index is None:
        try:
            frame_index = frame_index_from_stem(Path(path).stem)
        except ValueError:
            frame_index = 0
    return FeatureMap(frame_index=frame_index, data=arr)


# ---------------------------------------------------------------------------
# PGM masks


def frame_index_from_stem(stem: str) -> int:
    """Decode the leading decimal digits of a filename stem ('012_x' -> 12)."""
    m = re.match(r"\d+", stem)
    if m is None:
        raise ValueError(f"cannot decode a frame index from filename stem {stem!r}")
    return int(m.group(0))


def mask_bytes(mask: LabelMask) -> bytes:
    h, w = mask.labels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + mask.labels.tobytes(order="C")


def _next_header_token(f: BinaryIO) -> bytes:
    c = f.read(1)
    while True:
        if not c:
            raise MaskFormatError("truncated PGM header")
        if c == b"#":  # comment runs to end of line
            while c and c != b"\n":
                c = f.read(1)
            c = f.read(1)
            continue
        if c.isspace():
            c = f.read(1)
            continue
        break
    token = bytearray()
    while c and not c.isspace():
        token += c
        c = f.read(1)
    # the byte just consumed is the single whitespace delimiter, so after
    # the maxval token the stream is positioned exactly at the payload
    return bytes(token)


def read_mask(path, frame_index: int | None = None) -> LabelMask:
    """Read a binary PGM mask; header comments are allowed, maxval must be
    255, and the payload must hold exactly width*height bytes."""
    with open(path, "rb") as f:
        magic = _next_header_token(f)
        if magic != b"P5":
            raise MaskFormatError(f"bad PGM magic {magic!r}, expected b'P5'")
        fields = []
        for name in ("width", "height", "maxval"):
            token = _next_header_token(f)
            if not token.isdigit():
                raise MaskFormatError(f"non-numeric PGM {name} token {token!r}")
            fields.append(int(token))
        width, height, maxval = fields
        if width < 1 or height < 1:
            raise MaskFormatError(f"invalid PGM dimensions {width}x{height}")
        if maxval != 255:
            raise MaskFormatError(f"PGM maxval must be 255, got {maxval}")
        payload = f.read()
    if len(payload) != width * height:
        raise MaskFormatError(
            f"payload holds {len(payload)} bytes but header claims "
            f"{width}x{height} = {width * height}")
    if frame_index is None:
        try:
            frame_index = frame_index_from_stem(Path(path).stem)
        except ValueError as exc:
            raise MaskFormatError(str(exc)) from None
    labels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return LabelMask(frame_index=frame_index, labels=labels)


def write_mask(mask: LabelMask, path) -> None:
    atomic_write_bytes(path, mask_bytes(mask))


def write_mask_dir(sequence: FrameSequence, directory, pad: int = 3) -> list[Path]:
    """Write one zero-padded-stem PGM per frame; returns the paths written."""
    out = Path(directory)
    paths = []
    for frame in sequence:
        path = out / f"{frame.frame_index:0{pad}d}.pgm"
        write_mask(frame, path)
        paths.append(path)
    return paths


def read_mask_dir(directory) -> FrameSequence:
    """Load every .pgm in a directory, ordered by decoded frame index.

    Rejects duplicate frame indices, malformed files, and mixed dimensions.
    """
    root = Path(directory)
    if not root.is_dir():
        raise MaskFormatError(f"not a directory: {root}")
    files = sorted(root.glob("*.pgm"))
    if not files:
        raise MaskFormatError(f"no .pgm mask files in {root}")
    by_index: dict[int, tuple[Path, LabelMask]] = {}
    for path in files:
        mask = read_mask(path)
        if mask.frame_index in by_index:
            prev = by_index[mask.frame_index][0]
            raise MaskFormatError(
                f"duplicate frame index {mask.frame_index}: {prev.name} and {path.name}")
        by_index[mask.frame_index] = (path, mask)
    frames = [by_index[i][1] for i in sorted(by_index)]
    shapes = {f.labels.shape for f in frames}
    if len(shapes) > 1:
        raise MaskFormatError(f"inconsistent mask dimensions: {sorted(shapes)}")
    return FrameSequence(frames)


def read_feature_dir(directory) -> list[FeatureMap]:
    """Load every tensor file in a directory, ordered by decoded frame index."""
    root = Path(directory)
    if not root.is_dir():
        raise TensorFormatError(f"not a directory: {root}")
    files = sorted(root.glob("*.ften")) + sorted(root.glob("*.bin"))
    if not files:
        raise TensorFormatError(f"no tensor files (*.ften, *.bin) in {root}")
    by_index: dict[int, tuple[Path, FeatureMap]] = {}
    for path in files:
        try:
            index = frame_index_from_stem(path.stem)
        except ValueError as exc:
            raise TensorFormatError(str(exc)) from None
        if index in by_index:
            prev = by_index[index][0]
            raise TensorFormatError(
                f"duplicate frame index {index}: {prev.name} and {path.name}")
        by_index[index] = (path, read_tensor(path, frame_index=index))
    return [by_index[i][1] for i in sorted(by_index)]


# ---------------------------------------------------------------------------
# JSON emission (fixed key order, no timestamps)


def json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def jsonl_text(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r) + "\n" for r in records)


def write_json(obj, path) -> None:
    atomic_write_text(path, json_text(obj))


def write_jsonl(records: Iterable[dict], path) -> None:
    atomic_write_text(path, jsonl_text(records))


def _scores_lists(scores: dict[str, dict[int, float]]) -> dict[str, list[list]]:
    # [[frame_index, score], ...] keeps indices as integers (JSON object
    # keys would stringify them) and fixes the ordering
    return {
        group: [[idx, float(s[idx])] for idx in sorted(s)]
        for group, s in scores.items()
    }


def prune_record(step: int, bank_before: tuple[int, ...], outcome: PruneOutcome,
                 mode: str, metric: str) -> dict:
    """One JSON-lines record of a prune step (bank state it ran on)."""
    return {
        "schema_version": SCHEMA_VERSION,
        "step": step,
        "bank_before": list(bank_before),
        "scores": _scores_lists(outcome.scores),
        "pruned": list(outcome.pruned_frame_indices),
        "retained": list(outcome.retained_frame_indices),
        "mode": mode,
        "metric": metric,
    }


def track_records(trace: TrackTrace) -> list[dict]:
    """JSON-lines records for a tracking run, one per step."""
    records = []
    for s in trace.steps:
        records.append({
            "schema_version": SCHEMA_VERSION,
            "step": s.step,
            "frame_index": s.frame_index,
            "bank_before": list(s.bank_before),
            "bank_after": list(s.bank_after),
            "scores": _scores_lists(s.outcome.scores),
            "pruned": list(s.outcome.pruned_frame_indices),
            "retained": list(s.outcome.retained_frame_indices),
            "mode": trace.mode,
            "metric": trace.metric,
            "selected": s.selected_frame_index,
            "readout_cost": s.readout_cost,
        })
    return records
