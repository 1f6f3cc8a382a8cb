"""Raster tiling and cropping for large orthophoto-style images."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidGrid, MissingGSD, OutOfBounds, TileLargerThanImage


@dataclass(frozen=True)
class Raster:
    """8-bit image: data is (H, W) or (H, W, 3) uint8; gsd is meters per
    pixel side when known."""

    data: np.ndarray
    gsd: Optional[float] = None

    def __post_init__(self):
        if self.data.dtype != np.uint8:
            raise ValueError("raster data must be uint8")
        if self.data.ndim not in (2, 3):
            raise ValueError("raster data must be HxW or HxWxC")
        if self.data.ndim == 3 and self.data.shape[2] not in (1, 3):
            raise ValueError("raster channels must be 1 or 3")
        if self.height < 1 or self.width < 1:
            raise ValueError("raster must be at least 1x1")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]


@dataclass(frozen=True)
class PixelRect:
    """Axis-aligned pixel rectangle: top-left (x0, y0), size (w, h)."""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1 or self.x0 < 0 or self.y0 < 0:
            raise OutOfBounds(f"invalid rect {self}")

    def inside(self, r: Raster) -> bool:
        return self.x0 + self.w <= r.width and self.y0 + self.h <= r.height


@dataclass(frozen=True)
class Tile:
    rect: PixelRect
    raster: Raster
    partial: bool = False
    row: int = 0
    col: int = 0


def crop(r: Raster, rect: PixelRect) -> Raster:
    if not rect.inside(r):
        raise OutOfBounds(f"rect {rect} exceeds raster {r.width}x{r.height}")
    sub = r.data[rect.y0 : rect.y0 + rect.h, rect.x0 : rect.x0 + rect.w].copy()
    return Raster(sub, gsd=r.gsd)


def tile_by_ground_size(r: Raster, tile_m: float) -> List[Tile]:
    """Cover the raster with square tiles of physical side tile_m (meters).

    Tile side in pixels is round(tile_m / gsd). Right/bottom edge tiles may
    be smaller and are flagged partial rather than padded or dropped.
    """
    if r.gsd is None or r.gsd <= 0:
        raise MissingGSD("raster has no ground sample distance")
    if tile_m <= 0:
        raise ValueError("tile_m must be positive")
    side = int(round(tile_m / r.gsd))
    if side < 1:
        raise TileLargerThanImage(f"tile side rounds to {side} px")
    if side > r.width or side > r.height:
        raise TileLargerThanImage(
            f"{side} px tile exceeds {r.width}x{r.height} raster"
        )
    tiles = []
    for row, y0 in enumerate(range(0, r.height, side)):
        for col, x0 in enumerate(range(0, r.width, side)):
            w = min(side, r.width - x0)
            h = min(side, r.height - y0)
            rect = PixelRect(x0, y0, w, h)
            tiles.append(
                Tile(rect, crop(r, rect), partial=(w < side or h < side),
                     row=row, col=col)
            )
    return tiles


def _grid_edges(total: int, parts: int) -> List[int]:
    """Cut points for `parts` segments differing by at most one pixel,
    remainder to the leading segments."""
    base, rem = divmod(total, parts)
    edges = [0]
    for i in range(parts):
        edges.append(edges[-1] + base + (1 if i < rem else 0))
    return edges


def tile_grid(r: Raster, rows: int, cols: int) -> List[Tile]:
    """Split into rows x cols tiles whose concatenation reproduces the
    input bit-exactly."""
    if not (1 <= rows <= r.height and 1 <= cols <= r.width):
        raise InvalidGrid(f"grid {rows}x{cols} invalid for {r.width}x{r.height}")
    ys = _grid_edges(r.height, rows)
    xs = _grid_edges(r.width, cols)
    tiles = []
    for i in range(rows):
        for j in range(cols):
            rect = PixelRect(xs[j], ys[i], xs[j + 1] - xs[j], ys[i + 1] - ys[i])
            tiles.append(Tile(rect, crop(r, rect), row=i, col=j))
    return tiles


def stitch(tiles: Sequence[Tile], width: int, height: int,
           gsd: Optional[float] = None) -> Raster:
    """Reassemble tiles (any order) into a full raster."""
    first = tiles[0].raster.data
    shape = (height, width) if first.ndim == 2 else (height, width, first.shape[2])
    out = np.zeros(shape, dtype=np.uint8)
    for t in tiles:
        rc = t.rect
        out[rc.y0 : rc.y0 + rc.h, rc.x0 : rc.x0 + rc.w] = t.raster.data
    return Raster(out, gsd=gsd)


def manifest_lines(tiles: Sequence[Tile], stem: str, ext: str = "png") -> List[str]:
    """One line per tile: filename, x0, y0, w, h, partial flag."""
    lines = []
    for t in tiles:
        name = f"{stem}_r{t.row}_c{t.col}.{ext}"
        rc = t.rect
        lines.append(f"{name} {rc.x0} {rc.y0} {rc.w} {rc.h} {int(t.partial)}")
    return lines
