"""Ingestion of external model predictions: YOLO-style lines extended with a
trailing confidence token."""

from __future__ import annotations

from typing import List, Optional

from .errors import MissingConfidence
from .labels import Annotation, ClassMap, parse_label_line, serialize_annotation


def parse_prediction_line(line: str, mode: Optional[str] = None,
                          class_map: Optional[ClassMap] = None) -> Annotation:
    """One prediction line: label line plus one trailing confidence in [0,1]."""
    ann = parse_label_line(line, mode=mode, class_map=class_map, confidence=True)
    if ann.confidence is None:
        raise MissingConfidence(f"no confidence in line: {line!r}")
    return ann


def parse_prediction_text(text: str, mode: Optional[str] = None,
                          class_map: Optional[ClassMap] = None) -> List[Annotation]:
    return [
        parse_prediction_line(ln, mode=mode, class_map=class_map)
        for ln in text.splitlines()
        if ln.strip()
    ]


def serialize_predictions(preds: List[Annotation], mode: str) -> str:
    lines = [serialize_annotation(p, mode) for p in preds]
    return "\n".join(lines) + ("\n" if lines else "")


def confidence_filter(preds: List[Annotation], threshold: float) -> List[Annotation]:
    """Keep predictions with confidence >= threshold, order preserved."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0,1]")
    return [p for p in preds if p.confidence is not None
            and p.confidence >= threshold]
