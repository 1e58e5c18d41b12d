"""Deterministic rasterization: color blending, heat maps, contour overlays.

Images are (height, width, 3) uint8 arrays. All functions are pure and
byte-stable: the same inputs always produce the same pixels, and the PNG
encoder is pinned to fixed settings so re-encoding is byte-identical.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "Palette",
    "CATEGORICAL16",
    "HEAT_LUT",
    "blend",
    "categorical",
    "heatmap",
    "overlay_contours",
    "encode_png",
    "write_png",
    "write_ppm",
]


@dataclass(frozen=True)
class Palette:
    """Ordered color list with components in [0, 1]."""

    colors: tuple[tuple[float, float, float], ...]
    kind: str = "categorical"

    def __post_init__(self):
        if not self.colors:
            raise ValueError("palette needs at least one color")
        for c in self.colors:
            if len(c) != 3 or any(not (0.0 <= x <= 1.0) for x in c):
                raise ValueError(f"bad color {c}")

    def __len__(self) -> int:
        return len(self.colors)

    def array(self) -> np.ndarray:
        return np.asarray(self.colors, dtype=np.float64)


# 16 well separated colors for label maps.
CATEGORICAL16 = Palette(
    (
        (0.902, 0.098, 0.294), (0.235, 0.706, 0.294), (1.000, 0.882, 0.098),
        (0.263, 0.388, 0.847), (0.961, 0.510, 0.188), (0.569, 0.118, 0.706),
        (0.275, 0.941, 0.941), (0.941, 0.196, 0.902), (0.737, 0.965, 0.047),
        (0.980, 0.745, 0.831), (0.000, 0.502, 0.502), (0.863, 0.745, 1.000),
        (0.667, 0.431, 0.157), (1.000, 0.980, 0.784), (0.502, 0.000, 0.000),
        (0.667, 1.000, 0.765),
    )
)


def _round_u8(x: np.ndarray) -> np.ndarray:
    return np.floor(np.clip(x, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def _build_heat_lut() -> np.ndarray:
    """256-entry blue -> green -> yellow ramp."""
    t = np.arange(256) / 255.0
    lo = np.clip(t * 2.0, 0.0, 1.0)
    hi = np.clip(t * 2.0 - 1.0, 0.0, 1.0)
    rgb = np.empty((256, 3))
    rgb[:, 0] = hi                # red rises on the second half
    rgb[:, 1] = lo                # green rises on the first half
    rgb[:, 2] = 1.0 - lo          # blue fades on the first half
    lut = _round_u8(rgb)
    lut.setflags(write=False)
    return lut


HEAT_LUT = _build_heat_lut()


def blend(dist: np.ndarray, palette: Palette, width: int, height: int) -> np.ndarray:
    """Per-vertex convex color combination of the first l palette entries.

    dist holds (V, l) weights summing to one per vertex (the probabilistic
    map's distributions). Rounds half-up to 8 bit.
    """
    dist = np.asarray(dist, dtype=np.float64)
    l = dist.shape[1]
    if len(palette) < l:
        raise ValueError(f"palette has {len(palette)} colors, need {l}")
    rgb = dist @ palette.array()[:l]
    return _round_u8(rgb).reshape(height, width, 3)


def categorical(labels: np.ndarray, palette: Palette, width: int, height: int,
                background: tuple[int, int, int] = (255, 255, 255)) -> np.ndarray:
    """Map label indices to palette colors; negative labels get the background."""
    labels = np.asarray(labels).reshape(-1)
    if labels.max(initial=-1) >= len(palette):
        raise ValueError(f"palette has {len(palette)} colors, labels reach {labels.max()}")
    table = _round_u8(palette.array())
    out = np.empty((labels.size, 3), dtype=np.uint8)
    neg = labels < 0
    out[neg] = np.asarray(background, dtype=np.uint8)
    out[~neg] = table[labels[~neg]]
    return out.reshape(height, width, 3)


def heatmap(values: np.ndarray, width: int, height: int) -> np.ndarray:
    """Heat ramp over [min, max]; a constant field renders all lowest color."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    lo, hi = v.min(), v.max()
    t = np.zeros_like(v) if hi == lo else (v - lo) / (hi - lo)
    idx = np.floor(t * 255.0 + 0.5).astype(np.int64).clip(0, 255)
    return HEAT_LUT[idx].reshape(height, width, 3)


def overlay_contours(image: np.ndarray, polylines, color: tuple[int, int, int]) -> np.ndarray:
    """Rasterize polylines onto a copy of the image (integer line stepping)."""
    out = np.array(image, copy=True)
    h, w = out.shape[:2]
    col = np.asarray(color, dtype=np.uint8)
    for line in polylines:
        for (r0, c0), (r1, c1) in zip(line[:-1], line[1:]):
            _draw_line(out, int(round(r0)), int(round(c0)), int(round(r1)), int(round(c1)), col, h, w)
    return out


def _draw_line(img, r0, c0, r1, c1, col, h, w):
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr = 1 if r0 < r1 else -1
    sc = 1 if c0 < c1 else -1
    err = dr - dc
    while True:
        if 0 <= r0 < h and 0 <= c0 < w:
            img[r0, c0] = col
        if r0 == r1 and c0 == c1:
            return
        e2 = 2 * err
        if e2 > -dc:
            err -= dc
            r0 += sr
        if e2 < dr:
            err += dr
            c0 += sc


def encode_png(image: np.ndarray) -> bytes:
    """PNG bytes with pinned encoder settings (byte-stable)."""
    img = Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8), mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False, compress_level=6)
    return buf.getvalue()


def write_png(image: np.ndarray, path: str | Path) -> None:
    try:
        Path(path).write_bytes(encode_png(image))
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc


def write_ppm(image: np.ndarray, path: str | Path) -> None:
    """Binary P6 output, a zero-dependency fallback encoding."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    h, w = image.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode()
    try:
        Path(path).write_bytes(header + image.tobytes())
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
