"""Binary masks from polygon annotations, class filtering, area estimation,
and color overlays."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, UnknownClass
from .labels import Annotation, ClassMap

WHITE = 255

# Default class colors (RGB): erosion green, aluvial light blue,
# río orange; soil and vegetation get distinct earth tones.
DEFAULT_CLASS_COLORS: Dict[int, Tuple[int, int, int]] = {
    0: (160, 120, 60),
    1: (20, 120, 20),
    2: (135, 206, 235),
    3: (0, 230, 0),
    4: (255, 140, 0),
}

OVERLAY_ALPHA = 0.4


@dataclass(frozen=True)
class PixelScale:
    """Physical size of one pixel: side length in meters, or area in m²."""

    mode: str  # "pixel_side_m" | "pixel_area_m2"
    value: float

    def __post_init__(self):
        if self.mode not in ("pixel_side_m", "pixel_area_m2"):
            raise ValueError(f"unknown scale mode {self.mode!r}")
        if self.value <= 0:
            raise ValueError("pixel scale must be positive")

    @property
    def area_per_pixel(self) -> float:
        return self.value ** 2 if self.mode == "pixel_side_m" else self.value


@dataclass(frozen=True)
class AreaResult:
    pixel_count: int
    area_m2: Optional[float] = None

    @property
    def area_px(self) -> int:
        return self.pixel_count


def _on_segment(px: np.ndarray, py: float, x1, y1, x2, y2) -> np.ndarray:
    """Which pixel centers (px, py) lie exactly on segment (x1,y1)-(x2,y2)."""
    cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
    within = (
        (px >= min(x1, x2)) & (px <= max(x1, x2))
        & (py >= min(y1, y2)) & (py <= max(y1, y2))
    )
    return (cross == 0.0) & within


def fill_polygon(points: Sequence[Tuple[float, float]], width: int,
                 height: int) -> np.ndarray:
    """Even-odd scanline fill of one polygon given in pixel coordinates.

    A pixel is set when its center (x+0.5, y+0.5) is inside; centers
    exactly on an edge count as inside. Returns bool (H, W).
    """
    out = np.zeros((height, width), dtype=bool)
    pts = np.asarray(points, dtype=np.float64)
    xs1, ys1 = pts[:, 0], pts[:, 1]
    xs2, ys2 = np.roll(xs1, -1), np.roll(ys1, -1)

    y_lo = max(0, int(np.floor(pts[:, 1].min() - 0.5)))
    y_hi = min(height - 1, int(np.ceil(pts[:, 1].max())))
    centers_x = np.arange(width) + 0.5

    for row in range(y_lo, y_hi + 1):
        yc = row + 0.5
        # half-open rule avoids double counting at shared vertices
        straddle = ((ys1 <= yc) & (ys2 > yc)) | ((ys2 <= yc) & (ys1 > yc))
        if straddle.any():
            t = (yc - ys1[straddle]) / (ys2[straddle] - ys1[straddle])
            x_int = xs1[straddle] + t * (xs2[straddle] - xs1[straddle])
            x_int.sort()
            # parity of crossings strictly right of each center
            counts = len(x_int) - np.searchsorted(x_int, centers_x, side="right")
            out[row] |= (counts % 2).astype(bool)
        # boundary pixels count as inside
        for x1, y1, x2, y2 in zip(xs1, ys1, xs2, ys2):
            if min(y1, y2) <= yc <= max(y1, y2):
                out[row] |= _on_segment(centers_x, yc, x1, y1, x2, y2)
    return out


def rasterize(annotations: Iterable[Annotation], class_id: int, width: int,
              height: int) -> np.ndarray:
    """Union mask (uint8, {0,255}) of all polygons of one class."""
    if width < 1 or height < 1:
        raise ValueError("mask dimensions must be >= 1")
    acc = np.zeros((height, width), dtype=bool)
    for ann in annotations:
        if ann.class_id != class_id or ann.polygon is None:
            continue
        pixel_pts = [(x * width, y * height) for x, y in ann.polygon]
        acc |= fill_polygon(pixel_pts, width, height)
    return np.where(acc, WHITE, 0).astype(np.uint8)


def rasterize_per_class(annotations: Sequence[Annotation], class_map: ClassMap,
                        width: int, height: int) -> Dict[int, np.ndarray]:
    return {
        cid: rasterize(annotations, cid, width, height)
        for cid in range(len(class_map))
    }


def filter_class(masks: Dict[int, np.ndarray], keep: int,
                 class_map: Optional[ClassMap] = None) -> np.ndarray:
    """Keep only one class's mask; other classes are discarded."""
    if class_map is not None and keep not in class_map:
        raise UnknownClass(f"class id {keep} not in class map")
    if keep in masks:
        return masks[keep]
    if not masks:
        raise UnknownClass(f"no mask available for class {keep}")
    any_mask = next(iter(masks.values()))
    return np.zeros_like(any_mask)


def area(mask: np.ndarray, scale: Optional[PixelScale] = None) -> AreaResult:
    """White-pixel count, converted to m² when a pixel scale is given."""
    _check_binary(mask)
    count = int(np.count_nonzero(mask))
    if scale is None:
        return AreaResult(pixel_count=count)
    return AreaResult(pixel_count=count, area_m2=count * scale.area_per_pixel)


def _check_binary(mask: np.ndarray) -> None:
    if mask.ndim != 2 or mask.dtype != np.uint8:
        raise ValueError("mask must be 2-D uint8")
    bad = np.setdiff1d(np.unique(mask), [0, WHITE])
    if bad.size:
        raise ValueError(f"mask contains non-binary values {bad.tolist()}")


def overlay(image: np.ndarray, masks: Dict[int, np.ndarray],
            colors: Optional[Dict[int, Tuple[int, int, int]]] = None,
            alpha: float = OVERLAY_ALPHA) -> np.ndarray:
    """Alpha-blend class colors over masked regions; untouched elsewhere."""
    colors = colors or DEFAULT_CLASS_COLORS
    if image.ndim == 2:
        image = np.stack([image] * 3, axis=-1)
    out = image.astype(np.float64)
    for cid in sorted(masks):
        m = masks[cid]
        if m.shape != image.shape[:2]:
            raise DimensionMismatch(
                f"mask {m.shape} vs image {image.shape[:2]}"
            )
        sel = m == WHITE
        if not sel.any():
            continue
        color = np.array(colors.get(cid, (255, 0, 255)), dtype=np.float64)
        out[sel] = (1 - alpha) * out[sel] + alpha * color
    return np.rint(out).clip(0, 255).astype(np.uint8)


def save_mask_png(mask: np.ndarray, path: str) -> None:
    _check_binary(mask)
    Image.fromarray(mask, mode="L").save(path)


def load_mask_png(path: str) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("L"))
    _check_binary(arr)
    return arr


def encode_png(arr: np.ndarray) -> bytes:
    mode = "L" if arr.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()
