"""YOLO-style label handling: class map, annotations, parsing/serialization,
dataset layout and deterministic splitting."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import yaml

from .errors import (
    ConfidenceOutOfRange,
    InvalidFractions,
    MalformedLine,
    MissingConfidence,
    ModeMismatch,
    OutOfRange,
    UnknownClass,
)

COORD_DECIMALS = 6

DEFAULT_CLASS_NAMES = ["suelo", "vegetación", "aluvial", "erosión fluvial", "río"]

EROSION_CLASS_ID = 3

SPLIT_NAMES = ("train", "val", "test")


class ClassMap:
    """Ordered id -> name table. Ids are contiguous from 0."""

    def __init__(self, names: Sequence[str]):
        names = list(names)
        if not names:
            raise ValueError("class map needs at least one class")
        if len(set(names)) != len(names) or any(not n for n in names):
            raise ValueError("class names must be unique and non-empty")
        self._names = names

    @classmethod
    def default(cls) -> "ClassMap":
        return cls(DEFAULT_CLASS_NAMES)

    @property
    def names(self) -> List[str]:
        return list(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, class_id: int) -> bool:
        return 0 <= class_id < len(self._names)

    def name(self, class_id: int) -> str:
        if class_id not in self:
            raise UnknownClass(f"class id {class_id} not in class map")
        return self._names[class_id]

    def id_of(self, name: str) -> int:
        try:
            return self._names.index(name)
        except ValueError:
            raise UnknownClass(f"class name {name!r} not in class map") from None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ClassMap) and self._names == other._names

    def __repr__(self) -> str:
        return f"ClassMap({self._names!r})"


@dataclass(frozen=True)
class BBox:
    """Normalized center/size box; all fields in [0,1], w,h > 0."""

    xc: float
    yc: float
    w: float
    h: float

    def corners(self) -> Tuple[float, float, float, float]:
        """(x0, y0, x1, y1), clamped to [0,1]."""
        x0 = max(0.0, self.xc - self.w / 2)
        y0 = max(0.0, self.yc - self.h / 2)
        x1 = min(1.0, self.xc + self.w / 2)
        y1 = min(1.0, self.yc + self.h / 2)
        return x0, y0, x1, y1

    @classmethod
    def from_corners(cls, x0: float, y0: float, x1: float, y1: float) -> "BBox":
        return cls((x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0)


def polygon_area(points: Sequence[Tuple[float, float]]) -> float:
    """Unsigned shoelace area of a closed ring (not repeated last vertex)."""
    s = 0.0
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return abs(s) / 2


def _segments_cross(p1, p2, p3, p4) -> bool:
    """Proper intersection of open segments p1p2 and p3p4."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    o1 = orient(p1, p2, p3)
    o2 = orient(p1, p2, p4)
    o3 = orient(p3, p4, p1)
    o4 = orient(p3, p4, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def polygon_is_simple(points: Sequence[Tuple[float, float]]) -> bool:
    n = len(points)
    for i in range(n):
        a1, a2 = points[i], points[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = points[j], points[(j + 1) % n]
            if _segments_cross(a1, a2, b1, b2):
                return False
    return True


@dataclass(frozen=True)
class Annotation:
    """One labeled object: class id, optional normalized polygon, derived bbox,
    optional confidence (predictions only)."""

    class_id: int
    bbox: BBox
    polygon: Optional[Tuple[Tuple[float, float], ...]] = None
    confidence: Optional[float] = None

    def __post_init__(self):
        if self.polygon is not None:
            if len(self.polygon) < 3:
                raise MalformedLine("polygon needs at least 3 points")
            if polygon_area(self.polygon) == 0.0:
                raise MalformedLine("degenerate (zero-area) polygon")
            if not polygon_is_simple(self.polygon):
                raise MalformedLine("self-intersecting polygon")
            xs = [p[0] for p in self.polygon]
            ys = [p[1] for p in self.polygon]
            want = BBox.from_corners(min(xs), min(ys), max(xs), max(ys))
            got = self.bbox
            if any(
                abs(a - b) > 1e-9
                for a, b in [
                    (want.xc, got.xc),
                    (want.yc, got.yc),
                    (want.w, got.w),
                    (want.h, got.h),
                ]
            ):
                raise MalformedLine("bbox does not match polygon extent")
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ConfidenceOutOfRange(f"confidence {self.confidence} outside [0,1]")

    @classmethod
    def from_polygon(
        cls,
        class_id: int,
        points: Sequence[Tuple[float, float]],
        confidence: Optional[float] = None,
    ) -> "Annotation":
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        bbox = BBox.from_corners(min(xs), min(ys), max(xs), max(ys))
        return cls(class_id, bbox, tuple(tuple(p) for p in points), confidence)


@dataclass
class LabelFile:
    """All annotations of one image."""

    image_id: str
    annotations: List[Annotation] = field(default_factory=list)

    def validate(self, class_map: ClassMap) -> None:
        for ann in self.annotations:
            if ann.class_id not in class_map:
                raise UnknownClass(
                    f"{self.image_id}: class id {ann.class_id} not in class map"
                )


def _parse_floats(tokens: Sequence[str], line: str) -> List[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise MalformedLine(f"non-numeric token in line: {line!r}") from None


def _check_range(values: Iterable[float], line: str) -> None:
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise OutOfRange(f"coordinate {v} outside [0,1] in line: {line!r}")


def parse_label_line(
    line: str,
    mode: Optional[str] = None,
    class_map: Optional[ClassMap] = None,
    confidence: bool = False,
) -> Annotation:
    """Parse one YOLO label line.

    mode: 'bbox' (5 tokens), 'polygon' (odd count >= 7), or None to
    auto-detect by token count. With confidence=True one extra trailing
    token in [0,1] is required (prediction lines).
    """
    tokens = line.split()
    if not tokens:
        raise MalformedLine("empty line")
    try:
        class_id = int(tokens[0])
        if class_id < 0:
            raise ValueError
    except ValueError:
        raise MalformedLine(f"bad class id in line: {line!r}") from None

    conf: Optional[float] = None
    if confidence:
        if len(tokens) < 2:
            raise MissingConfidence(f"no confidence token in line: {line!r}")
        conf = _parse_floats(tokens[-1:], line)[0]
        if not 0.0 <= conf <= 1.0:
            raise ConfidenceOutOfRange(f"confidence {conf} outside [0,1]")
        tokens = tokens[:-1]

    ncoords = len(tokens) - 1
    if mode is None:
        if ncoords == 4:
            mode = "bbox"
        elif ncoords >= 6 and ncoords % 2 == 0:
            mode = "polygon"
        else:
            raise MalformedLine(f"cannot infer mode from {ncoords} coords: {line!r}")
    if mode not in ("bbox", "polygon"):
        raise ValueError(f"unknown mode {mode!r}")

    coords = _parse_floats(tokens[1:], line)
    _check_range(coords, line)

    if mode == "bbox":
        if ncoords != 4:
            raise MalformedLine(f"bbox line needs 4 coords, got {ncoords}: {line!r}")
        xc, yc, w, h = coords
        if w <= 0 or h <= 0:
            raise MalformedLine(f"non-positive box size in line: {line!r}")
        ann = Annotation(class_id, BBox(xc, yc, w, h), confidence=conf)
    else:
        if ncoords < 6 or ncoords % 2 != 0:
            raise MalformedLine(
                f"polygon line needs >= 3 coordinate pairs: {line!r}"
            )
        points = [(coords[i], coords[i + 1]) for i in range(0, ncoords, 2)]
        ann = Annotation.from_polygon(class_id, points, confidence=conf)

    if class_map is not None and ann.class_id not in class_map:
        raise UnknownClass(f"class id {ann.class_id} not in class map")
    return ann


def parse_label_text(
    text: str,
    mode: Optional[str] = None,
    class_map: Optional[ClassMap] = None,
    image_id: str = "",
    confidence: bool = False,
) -> LabelFile:
    anns = [
        parse_label_line(ln, mode=mode, class_map=class_map, confidence=confidence)
        for ln in text.splitlines()
        if ln.strip()
    ]
    return LabelFile(image_id=image_id, annotations=anns)


def _fmt(v: float) -> str:
    return f"{v:.{COORD_DECIMALS}f}"


def serialize_annotation(ann: Annotation, mode: str) -> str:
    if mode == "polygon":
        if ann.polygon is None:
            raise ModeMismatch("annotation has no polygon")
        parts = [str(ann.class_id)]
        for x, y in ann.polygon:
            parts += [_fmt(x), _fmt(y)]
    elif mode == "bbox":
        b = ann.bbox
        parts = [str(ann.class_id), _fmt(b.xc), _fmt(b.yc), _fmt(b.w), _fmt(b.h)]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if ann.confidence is not None:
        parts.append(_fmt(ann.confidence))
    return " ".join(parts)


def serialize_label_file(file: LabelFile, mode: str) -> str:
    lines = [serialize_annotation(a, mode) for a in file.annotations]
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class DatasetIndex:
    """train/val/test image+label path pairs plus the active class map."""

    splits: Dict[str, List[Tuple[str, str]]]
    class_map: ClassMap

    def __post_init__(self):
        for name in SPLIT_NAMES:
            self.splits.setdefault(name, [])


def write_dataset_yaml(index: DatasetIndex, root: str = ".") -> str:
    doc = {
        "path": root,
        "train": "images/train",
        "val": "images/val",
        "test": "images/test",
        "names": index.class_map.names,
    }
    return yaml.safe_dump(doc, allow_unicode=True, sort_keys=False)


def read_dataset_yaml(text: str) -> ClassMap:
    doc = yaml.safe_load(text)
    names = doc["names"]
    if isinstance(names, dict):
        names = [names[i] for i in sorted(names)]
    return ClassMap(names)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_dataset(
    items: Sequence[str],
    fractions: Tuple[float, float, float],
    seed: int,
    counts: Optional[Tuple[int, int, int]] = None,
) -> Dict[str, List[str]]:
    """Deterministic train/val/test assignment.

    val/test sizes are round-half-up of N*fraction, train takes the
    remainder; explicit counts override the fractions.
    """
    if not items:
        raise InvalidFractions("no items to split")
    if counts is None:
        if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
            raise InvalidFractions(f"fractions {fractions} must be >=0 and sum to 1")
        n = len(items)
        n_val = _round_half_up(n * fractions[1])
        n_test = _round_half_up(n * fractions[2])
        n_train = n - n_val - n_test
        if n_train < 0:
            raise InvalidFractions("val+test rounding exceeds item count")
    else:
        n_train, n_val, n_test = counts
        if n_train + n_val + n_test != len(items):
            raise InvalidFractions("explicit counts must sum to item count")

    rng = random.Random(seed)
    order = sorted(items)
    rng.shuffle(order)
    return {
        "train": order[:n_train],
        "val": order[n_train : n_train + n_val],
        "test": order[n_train + n_val :],
    }


def label_path_for(image_path: Path, labels_root: Path, split: str) -> Path:
    """Label file name = image stem + .txt under labels/<split>."""
    return labels_root / split / (image_path.stem + ".txt")
