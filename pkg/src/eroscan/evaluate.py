"""Detection/segmentation metrics: IoU, greedy matching, 101-point AP,
mAP50-95, and a column-normalized confusion matrix with background."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch
from .labels import Annotation, BBox, ClassMap
from .mask import rasterize

MAP5095_THRESHOLDS = [round(0.50 + 0.05 * i, 2) for i in range(10)]

CONFUSION_IOU_DEFAULT = 0.45
CONFUSION_CONF_DEFAULT = 0.25


def box_iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two axis-aligned boxes; 0 on empty union."""
    ax0, ay0, ax1, ay1 = a.corners()
    bx0, by0, bx1, by1 = b.corners()
    iw = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union > 0 else 0.0


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    fa, fb = a != 0, b != 0
    union = np.count_nonzero(fa | fb)
    if union == 0:
        return 0.0
    return np.count_nonzero(fa & fb) / union


def _geometry_mask(ann: Annotation, size: Tuple[int, int]) -> np.ndarray:
    w, h = size
    return rasterize([ann], ann.class_id, w, h)


def iou_matrix(gts: Sequence[Annotation], preds: Sequence[Annotation],
               geometry: str, mask_size: Tuple[int, int] = (64, 64)) -> np.ndarray:
    """(len(preds), len(gts)) IoU table."""
    m = np.zeros((len(preds), len(gts)))
    if geometry == "box":
        for i, p in enumerate(preds):
            for j, g in enumerate(gts):
                m[i, j] = box_iou(p.bbox, g.bbox)
    elif geometry == "mask":
        pm = [_geometry_mask(p, mask_size) for p in preds]
        gm = [_geometry_mask(g, mask_size) for g in gts]
        for i in range(len(preds)):
            for j in range(len(gts)):
                m[i, j] = mask_iou(pm[i], gm[j])
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    return m


def greedy_match(ious: np.ndarray, confidences: Sequence[float],
                 threshold: float) -> List[Optional[int]]:
    """Match predictions to ground truths, highest confidence first.

    Each prediction takes the unmatched gt of maximal IoU if that IoU >=
    threshold (ties: lowest gt index); each gt is used at most once.
    Returns, per prediction (input order), the matched gt index or None.
    """
    n_pred, n_gt = ious.shape
    order = sorted(range(n_pred), key=lambda i: (-confidences[i], i))
    taken = [False] * n_gt
    result: List[Optional[int]] = [None] * n_pred
    for i in order:
        best_j, best_iou = None, threshold
        for j in range(n_gt):
            if taken[j]:
                continue
            if ious[i, j] > best_iou or (best_j is None and ious[i, j] >= threshold):
                best_j, best_iou = j, ious[i, j]
        if best_j is not None:
            taken[best_j] = True
            result[i] = best_j
    return result


def ap_101(tp_flags: Sequence[bool], n_gt: int) -> float:
    """101-point interpolated AP from TP flags sorted by descending
    confidence; n_gt is the total ground-truth count."""
    if n_gt == 0:
        return 0.0
    if not tp_flags:
        return 0.0
    tp = np.cumsum(np.asarray(tp_flags, dtype=np.float64))
    fp = np.cumsum(~np.asarray(tp_flags, dtype=bool))
    recall = tp / n_gt
    precision = tp / (tp + fp)
    # precision envelope: max precision at recall >= r
    recall_grid = np.linspace(0.0, 1.0, 101)
    env = np.zeros_like(recall_grid)
    for k, r in enumerate(recall_grid):
        sel = recall >= r - 1e-12
        env[k] = precision[sel].max() if sel.any() else 0.0
    return float(env.mean())


@dataclass
class ClassMetrics:
    class_id: int
    name: str
    images: int
    instances: int
    precision: float
    recall: float
    ap50: float
    ap50_95: float


@dataclass
class EvalReport:
    per_class: List[ClassMetrics]
    all_row: ClassMetrics
    confusion_raw: np.ndarray
    confusion: np.ndarray
    class_map: ClassMap

    def rows(self) -> List[ClassMetrics]:
        return [self.all_row] + self.per_class


ImageAnnotations = Mapping[str, Sequence[Annotation]]


def _class_dataset_matches(
    gts: ImageAnnotations, preds: ImageAnnotations, class_id: int,
    threshold: float, geometry: str, mask_size: Tuple[int, int],
) -> Tuple[List[Tuple[float, bool]], int]:
    """All predictions of one class as (confidence, is_tp) at one IoU
    threshold, plus the gt count."""
    records: List[Tuple[float, bool]] = []
    n_gt = 0
    images = set(gts) | set(preds)
    for img in sorted(images):
        g = [a for a in gts.get(img, []) if a.class_id == class_id]
        p = [a for a in preds.get(img, []) if a.class_id == class_id]
        n_gt += len(g)
        if not p:
            continue
        ious = iou_matrix(g, p, geometry, mask_size)
        confs = [a.confidence or 0.0 for a in p]
        matches = greedy_match(ious, confs, threshold)
        for a, m in zip(p, matches):
            records.append((a.confidence or 0.0, m is not None))
    records.sort(key=lambda r: -r[0])
    return records, n_gt


def evaluate(
    gts: ImageAnnotations,
    preds: ImageAnnotations,
    class_map: ClassMap,
    geometry: str = "box",
    mask_size: Tuple[int, int] = (64, 64),
    iou_thresholds: Sequence[float] = MAP5095_THRESHOLDS,
    confusion_iou: float = CONFUSION_IOU_DEFAULT,
    confusion_conf: float = CONFUSION_CONF_DEFAULT,
) -> EvalReport:
    """Per-class P/R (at the first threshold), AP50, mAP50-95, and the
    normalized confusion matrix. 'all' is the unweighted mean over classes
    with at least one ground-truth instance."""
    if list(iou_thresholds) != sorted(set(iou_thresholds)):
        raise ValueError("iou thresholds must be strictly increasing")
    t0 = iou_thresholds[0]
    per_class: List[ClassMetrics] = []
    for cid in range(len(class_map)):
        ap_by_t: Dict[float, float] = {}
        records0, n_gt = _class_dataset_matches(
            gts, preds, cid, t0, geometry, mask_size)
        for t in iou_thresholds:
            recs = (records0 if t == t0 else _class_dataset_matches(
                gts, preds, cid, t, geometry, mask_size)[0])
            ap_by_t[t] = ap_101([tp for _, tp in recs], n_gt)
        tp = sum(1 for _, is_tp in records0 if is_tp)
        n_pred = len(records0)
        precision = tp / n_pred if n_pred else 0.0
        recall = tp / n_gt if n_gt else 0.0
        images = sum(
            1 for img in gts if any(a.class_id == cid for a in gts[img]))
        ap50 = ap_by_t.get(0.50, ap_by_t[t0])
        ap50_95 = float(np.mean(list(ap_by_t.values())))
        per_class.append(ClassMetrics(cid, class_map.name(cid), images, n_gt,
                                      precision, recall, ap50, ap50_95))

    present = [c for c in per_class if c.instances > 0]
    if present:
        all_row = ClassMetrics(
            -1, "all",
            sum(c.images for c in present),
            sum(c.instances for c in present),
            float(np.mean([c.precision for c in present])),
            float(np.mean([c.recall for c in present])),
            float(np.mean([c.ap50 for c in present])),
            float(np.mean([c.ap50_95 for c in present])),
        )
    else:
        all_row = ClassMetrics(-1, "all", 0, 0, 0.0, 0.0, 0.0, 0.0)

    raw = confusion_matrix(gts, preds, class_map, geometry, mask_size,
                           confusion_iou, confusion_conf)
    return EvalReport(per_class, all_row, raw, normalize_confusion(raw),
                      class_map)


def confusion_matrix(
    gts: ImageAnnotations,
    preds: ImageAnnotations,
    class_map: ClassMap,
    geometry: str = "box",
    mask_size: Tuple[int, int] = (64, 64),
    iou_threshold: float = CONFUSION_IOU_DEFAULT,
    conf_threshold: float = CONFUSION_CONF_DEFAULT,
) -> np.ndarray:
    """Raw counts: rows = predicted class (+ background last), columns =
    true class (+ background). Matching is class-agnostic."""
    c = len(class_map)
    m = np.zeros((c + 1, c + 1), dtype=np.int64)
    images = set(gts) | set(preds)
    for img in sorted(images):
        g = list(gts.get(img, []))
        p = [a for a in preds.get(img, [])
             if (a.confidence or 0.0) >= conf_threshold]
        ious = iou_matrix(g, p, geometry, mask_size)
        confs = [a.confidence or 0.0 for a in p]
        matches = greedy_match(ious, confs, iou_threshold)
        matched_gts = set()
        for a, j in zip(p, matches):
            if j is None:
                m[a.class_id, c] += 1  # false positive vs background
            else:
                m[a.class_id, g[j].class_id] += 1
                matched_gts.add(j)
        for j, gt in enumerate(g):
            if j not in matched_gts:
                m[c, gt.class_id] += 1  # missed gt
    return m


def normalize_confusion(raw: np.ndarray) -> np.ndarray:
    """Divide each nonzero column by its sum."""
    out = raw.astype(np.float64)
    sums = out.sum(axis=0)
    nz = sums > 0
    out[:, nz] /= sums[nz]
    return out
