"""Label-preserving augmentation: grayscale, center zoom, quarter-turn
rotation. Geometry transforms are exact; provenance is tracked."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from .labels import Annotation, BBox, LabelFile, polygon_area
from .tiling import Raster

LUMA = (0.299, 0.587, 0.114)

# clipped polygon slivers below this many output pixels are dropped
MIN_SLIVER_PX2 = 10.0


@dataclass(frozen=True)
class AugmentOp:
    """One augmentation step: kind in {grayscale, zoom, rotate90}."""

    kind: str
    factor: float = 0.0  # zoom factor in (1, 4]
    k: int = 0           # quarter turns in {1, 2, 3}

    def __post_init__(self):
        if self.kind == "zoom" and not 1.0 < self.factor <= 4.0:
            raise ValueError(f"zoom factor {self.factor} outside (1, 4]")
        if self.kind == "rotate90" and self.k not in (1, 2, 3):
            raise ValueError(f"rotate90 k must be 1, 2 or 3, got {self.k}")
        if self.kind not in ("grayscale", "zoom", "rotate90"):
            raise ValueError(f"unknown augmentation {self.kind!r}")

    def tag(self) -> str:
        if self.kind == "zoom":
            return f"zoom:{self.factor:g}"
        if self.kind == "rotate90":
            return f"rot90:{self.k}"
        return "gray"


@dataclass(frozen=True)
class AugmentSpec:
    ops: Tuple[AugmentOp, ...]
    seed: int = 0

    def __post_init__(self):
        if not self.ops:
            raise ValueError("augment spec needs at least one op")

    def tag(self) -> str:
        return "+".join(op.tag() for op in self.ops)


@dataclass
class AugmentedItem:
    raster: Raster
    labels: LabelFile
    source_id: Optional[str] = None
    spec: Optional[AugmentSpec] = None


def _rot_point(x: float, y: float, k: int) -> Tuple[float, float]:
    # one clockwise quarter turn: (x, y) -> (1 - y, x)
    for _ in range(k):
        x, y = 1.0 - y, x
    return x, y


def rotate90(raster: Raster, labels: LabelFile, k: int) -> AugmentedItem:
    """Rotate raster and labels by k clockwise quarter turns."""
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    data = np.rot90(raster.data, k=-k).copy()
    anns = []
    for ann in labels.annotations:
        if ann.polygon is not None:
            pts = [_rot_point(x, y, k) for x, y in ann.polygon]
            anns.append(Annotation.from_polygon(ann.class_id, pts, ann.confidence))
        else:
            xc, yc = _rot_point(ann.bbox.xc, ann.bbox.yc, k)
            w, h = (ann.bbox.h, ann.bbox.w) if k % 2 else (ann.bbox.w, ann.bbox.h)
            anns.append(Annotation(ann.class_id, BBox(xc, yc, w, h),
                                   confidence=ann.confidence))
    return AugmentedItem(Raster(data, gsd=raster.gsd),
                         LabelFile(labels.image_id, anns))


def grayscale(raster: Raster, labels: LabelFile) -> AugmentedItem:
    """Fixed-luma grayscale replicated to 3 channels; labels untouched."""
    if raster.channels != 3:
        raise ValueError("grayscale needs a 3-channel raster")
    rgb = raster.data.astype(np.float64)
    luma = LUMA[0] * rgb[..., 0] + LUMA[1] * rgb[..., 1] + LUMA[2] * rgb[..., 2]
    gray = np.rint(luma).clip(0, 255).astype(np.uint8)
    data = np.stack([gray] * 3, axis=-1)
    return AugmentedItem(Raster(data, gsd=raster.gsd),
                         LabelFile(labels.image_id, list(labels.annotations)))


def _clip_polygon(points: Sequence[Tuple[float, float]], lo: float,
                  hi: float) -> List[List[Tuple[float, float]]]:
    """Intersect a simple polygon with the square [lo,hi] x [lo,hi].

    Returns zero or more simple rings: a concave polygon can split into
    several pieces at the crop boundary."""
    from shapely.geometry import Polygon, box

    poly = Polygon(points)
    if not poly.is_valid:
        poly = poly.buffer(0)
    clipped = poly.intersection(box(lo, lo, hi, hi))
    if clipped.is_empty:
        return []
    geoms = getattr(clipped, "geoms", [clipped])
    rings = []
    for g in geoms:
        if g.geom_type != "Polygon" or g.area == 0:
            continue
        ring = list(g.exterior.coords)[:-1]
        if len(ring) >= 3:
            rings.append([(float(x), float(y)) for x, y in ring])
    return rings


def zoom(raster: Raster, labels: LabelFile, factor: float) -> AugmentedItem:
    """Center crop of 1/factor extent, rescaled back to the input size with
    bilinear sampling; labels remapped, clipped, slivers dropped."""
    if not 1.0 < factor <= 4.0:
        raise ValueError(f"zoom factor {factor} outside (1, 4]")
    h, w = raster.data.shape[:2]
    lo = 0.5 - 0.5 / factor
    hi = 0.5 + 0.5 / factor
    box = (lo * w, lo * h, hi * w, hi * h)
    img = Image.fromarray(raster.data)
    data = np.asarray(img.resize((w, h), Image.BILINEAR, box=box)).copy()

    def remap(x, y):
        return ((x - lo) * factor, (y - lo) * factor)

    anns: List[Annotation] = []
    for ann in labels.annotations:
        if ann.polygon is not None:
            for ring in _clip_polygon(ann.polygon, lo, hi):
                pts = [remap(x, y) for x, y in ring]
                if polygon_area(pts) * w * h < MIN_SLIVER_PX2:
                    continue
                anns.append(Annotation.from_polygon(ann.class_id, pts,
                                                    ann.confidence))
        else:
            x0, y0, x1, y1 = ann.bbox.corners()
            x0, y0 = max(x0, lo), max(y0, lo)
            x1, y1 = min(x1, hi), min(y1, hi)
            if x1 <= x0 or y1 <= y0:
                continue
            (nx0, ny0), (nx1, ny1) = remap(x0, y0), remap(x1, y1)
            if (nx1 - nx0) * (ny1 - ny0) * w * h < MIN_SLIVER_PX2:
                continue
            anns.append(Annotation(ann.class_id,
                                   BBox.from_corners(nx0, ny0, nx1, ny1),
                                   confidence=ann.confidence))
    return AugmentedItem(Raster(data, gsd=(raster.gsd / factor
                                           if raster.gsd else None)),
                         LabelFile(labels.image_id, anns))


def apply_spec(raster: Raster, labels: LabelFile,
               spec: AugmentSpec) -> AugmentedItem:
    item = AugmentedItem(raster, labels)
    for op in spec.ops:
        if op.kind == "grayscale":
            item = grayscale(item.raster, item.labels)
        elif op.kind == "rotate90":
            item = rotate90(item.raster, item.labels, op.k)
        else:
            item = zoom(item.raster, item.labels, op.factor)
    item.spec = spec
    return item


@dataclass
class SourceItem:
    image_id: str
    raster: Raster
    labels: LabelFile
    split: str = "train"


def expand_dataset(
    items: Sequence[SourceItem],
    specs: Dict[str, Sequence[AugmentSpec]],
) -> List[AugmentedItem]:
    """Originals plus one derived item per (source, spec); derived items
    carry provenance and inherit the source's split."""
    out: List[AugmentedItem] = []
    for src in items:
        base = AugmentedItem(src.raster, src.labels, source_id=None, spec=None)
        out.append(base)
        for i, spec in enumerate(specs.get(src.image_id, [])):
            derived = apply_spec(src.raster, src.labels, spec)
            derived.source_id = src.image_id
            derived.labels.image_id = f"{src.image_id}__aug{i}_{spec.tag()}"
            out.append(derived)
    return out


def provenance_lines(items: Sequence[AugmentedItem]) -> List[str]:
    """Delimited provenance manifest: derived_id, source_id, spec tag."""
    lines = []
    for it in items:
        if it.source_id is not None and it.spec is not None:
            lines.append(f"{it.labels.image_id}\t{it.source_id}\t{it.spec.tag()}")
    return lines
