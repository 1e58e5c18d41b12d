"""Binary file codecs for fields, segmentations, and summary maps.

All formats are little-endian with a 4-byte magic. Encoders are
deterministic: identical inputs produce identical bytes.

  MCF1  scalar field   magic, u32 width, u32 height, f32 per vertex
  MSG1  segmentation   magic, u32 width, u32 height, u32 label per vertex
  PMP1  label counts   magic, u32 width, u32 height, u16 l, u16 n,
                       then l u16 counts per vertex
  SVM1  survival map   magic, u32 width, u32 height, f32 per vertex
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import ScalarGrid
from .segmentation import Segmentation

__all__ = [
    "FormatError",
    "save_field",
    "load_field",
    "save_segmentation",
    "load_segmentation",
    "save_pmap_counts",
    "load_pmap_counts",
    "save_survival_values",
    "load_survival_values",
]


class FormatError(ValueError):
    """Malformed stream; offset is the byte position of the defect."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _take(data: bytes, offset: int, count: int) -> bytes:
    if offset + count > len(data):
        raise FormatError(f"truncated stream, needed {count} bytes", len(data))
    return data[offset : offset + count]


def _header(data: bytes, magic: bytes) -> tuple[int, int, int]:
    if _take(data, 0, 4) != magic:
        raise FormatError(f"bad magic, expected {magic.decode()}", 0)
    width, height = struct.unpack_from("<II", data, 4)
    if width < 2 or height < 2:
        raise FormatError(f"invalid dimensions {width}x{height}", 4)
    return width, height, 12


def save_field(grid: ScalarGrid) -> bytes:
    payload = np.asarray(grid.values, dtype="<f4").tobytes()
    return b"MCF1" + struct.pack("<II", grid.width, grid.height) + payload


def load_field(data: bytes) -> ScalarGrid:
    width, height, off = _header(data, b"MCF1")
    raw = _take(data, off, 4 * width * height)
    values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise FormatError("non-finite field value", off + 4 * int(bad[0]))
    return ScalarGrid(width, height, values)


def save_segmentation(seg: Segmentation) -> bytes:
    payload = np.asarray(seg.labels, dtype="<u4").tobytes()
    return b"MSG1" + struct.pack("<II", seg.width, seg.height) + payload


def load_segmentation(data: bytes) -> Segmentation:
    width, height, off = _header(data, b"MSG1")
    raw = _take(data, off, 4 * width * height)
    labels = np.frombuffer(raw, dtype="<u4").astype(np.int64)
    if labels.size and labels.max() >= width * height:
        raise FormatError("label exceeds vertex count", off)
    return Segmentation(width, height, labels)


def save_pmap_counts(width: int, height: int, n_members: int, counts: np.ndarray) -> bytes:
    counts = np.asarray(counts)
    if counts.ndim != 2 or counts.shape[0] != width * height:
        raise ValueError("counts must have shape (width*height, l)")
    l = counts.shape[1]
    if not (1 <= l < 1 << 16 and 1 <= n_members < 1 << 16):
        raise ValueError("label or member count out of u16 range")
    head = b"PMP1" + struct.pack("<IIHH", width, height, l, n_members)
    return head + np.ascontiguousarray(counts, dtype="<u2").tobytes()


def load_pmap_counts(data: bytes) -> tuple[int, int, int, np.ndarray]:
    """Returns (width, height, n_members, counts) with counts shaped (V, l)."""
    width, height, off = _header(data, b"PMP1")
    l, n_members = struct.unpack_from("<HH", data, off)
    off += 4
    if l == 0 or n_members == 0:
        raise FormatError("zero label or member count", off - 4)
    raw = _take(data, off, 2 * width * height * l)
    counts = np.frombuffer(raw, dtype="<u2").astype(np.int64).reshape(width * height, l)
    bad = np.flatnonzero(counts.sum(axis=1) != n_members)
    if bad.size:
        raise FormatError("counts do not sum to member count", off + 2 * l * int(bad[0]))
    return width, height, n_members, counts


def save_survival_values(width: int, height: int, values: np.ndarray) -> bytes:
    values = np.asarray(values).reshape(-1)
    if values.shape != (width * height,):
        raise ValueError("survival values length does not match dimensions")
    return b"SVM1" + struct.pack("<II", width, height) + np.asarray(values, dtype="<f4").tobytes()


def load_survival_values(data: bytes) -> tuple[int, int, np.ndarray]:
    width, height, off = _header(data, b"SVM1")
    raw = _take(data, off, 4 * width * height)
    values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise FormatError("non-finite survival value", off + 4 * int(bad[0]))
    return width, height, values
