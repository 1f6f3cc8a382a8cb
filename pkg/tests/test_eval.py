import random

import numpy as np
import pytest

from eroscan.errors import DimensionMismatch
from eroscan.evaluate import (
    MAP5095_THRESHOLDS,
    ap_101,
    box_iou,
    confusion_matrix,
    evaluate,
    greedy_match,
    iou_matrix,
    mask_iou,
    normalize_confusion,
)
from eroscan.labels import Annotation, BBox, ClassMap

from conftest import random_bbox
from oracles import (
    naive_ap101,
    naive_box_iou,
    naive_confusion,
    naive_match,
    normalize_columns,
)


def ann(cid, xc, yc, w, h, conf=None):
    return Annotation(cid, BBox(xc, yc, w, h), confidence=conf)


class TestIoU:
    def test_identical_boxes(self):
        b = BBox(0.5, 0.5, 0.2, 0.3)
        assert box_iou(b, b) == 1.0

    def test_disjoint_boxes(self):
        assert box_iou(BBox(0.2, 0.2, 0.1, 0.1),
                       BBox(0.8, 0.8, 0.1, 0.1)) == 0.0

    def test_unit_squares_one_third(self):
        # unit squares offset by half a side: inter 0.5, union 1.5
        a = BBox(0.25, 0.5, 0.5, 0.5)
        b = BBox(0.5, 0.5, 0.5, 0.5)
        assert box_iou(a, b) == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_matches_naive_oracle(self, rng):
        for _ in range(200):
            a, b = random_bbox(rng), random_bbox(rng)
            assert box_iou(a, b) == pytest.approx(naive_box_iou(a, b),
                                                  abs=1e-12)

    def test_mask_iou(self):
        a = np.zeros((4, 4), np.uint8)
        b = np.zeros((4, 4), np.uint8)
        a[:2] = 255
        b[1:3] = 255
        assert mask_iou(a, b) == pytest.approx(4 / 12)
        assert mask_iou(np.zeros((4, 4), np.uint8),
                        np.zeros((4, 4), np.uint8)) == 0.0

    def test_mask_iou_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mask_iou(np.zeros((4, 4), np.uint8), np.zeros((5, 4), np.uint8))


class TestGreedyMatch:
    def test_single_pair_tp(self):
        g = [ann(0, 0.5, 0.5, 0.4, 0.4)]
        p = [ann(0, 0.55, 0.5, 0.4, 0.4, conf=0.9)]
        ious = iou_matrix(g, p, "box")
        assert ious[0, 0] >= 0.5
        assert greedy_match(ious, [0.9], 0.5) == [0]

    def test_two_preds_one_gt(self):
        g = [ann(0, 0.5, 0.5, 0.4, 0.4)]
        for confs in ([0.9, 0.6], [0.6, 0.9]):
            p = [ann(0, 0.5, 0.5, 0.4, 0.4, conf=confs[0]),
                 ann(0, 0.52, 0.5, 0.4, 0.4, conf=confs[1])]
            ious = iou_matrix(g, p, "box")
            m = greedy_match(ious, confs, 0.5)
            winner = 0 if confs[0] > confs[1] else 1
            assert m[winner] == 0
            assert m[1 - winner] is None

    def test_no_preds(self):
        assert greedy_match(np.zeros((0, 3)), [], 0.5) == []

    def test_tie_lowest_gt_index(self):
        g = [ann(0, 0.5, 0.5, 0.4, 0.4), ann(0, 0.5, 0.5, 0.4, 0.4)]
        p = [ann(0, 0.5, 0.5, 0.4, 0.4, conf=1.0)]
        ious = iou_matrix(g, p, "box")
        assert greedy_match(ious, [1.0], 0.5) == [0]

    def test_matches_naive_oracle(self, rng):
        for _ in range(300):
            n_g, n_p = rng.randint(0, 4), rng.randint(0, 4)
            g = [random_bbox(rng) for _ in range(n_g)]
            p = [random_bbox(rng) for _ in range(n_p)]
            confs = [round(rng.random(), 3) for _ in range(n_p)]
            t = rng.choice([0.3, 0.5, 0.7])
            ious = np.array([[naive_box_iou(pp, gg) for gg in g]
                             for pp in p]).reshape(n_p, n_g)
            got = greedy_match(ious, confs, t)
            want = naive_match(g, p, confs, t)
            assert got == want


class TestAP:
    def test_perfect_predictor(self):
        assert ap_101([True, True, True], 3) == 1.0

    def test_no_predictions(self):
        assert ap_101([], 2) == 0.0

    def test_half_recall_case(self):
        # TP then FP with 2 gts: PR points (0.5,1.0), (0.5,0.5)
        got = ap_101([True, False], 2)
        assert got == pytest.approx(51 / 101, abs=1e-12)
        assert got == pytest.approx(naive_ap101([(0.9, True), (0.8, False)],
                                                2), abs=1e-12)

    def test_matches_naive_oracle(self, rng):
        for _ in range(200):
            n_gt = rng.randint(1, 6)
            recs = [(round(rng.random(), 3), rng.random() < 0.6)
                    for _ in range(rng.randint(0, 8))]
            recs.sort(key=lambda r: -r[0])
            got = ap_101([tp for _, tp in recs], n_gt)
            want = naive_ap101(recs, n_gt)
            assert got == pytest.approx(want, abs=1e-9)


class TestEvaluate:
    def make_dataset(self):
        cmap = ClassMap(["a", "b"])
        gts = {
            "img1": [ann(0, 0.3, 0.3, 0.2, 0.2), ann(1, 0.7, 0.7, 0.2, 0.2)],
            "img2": [ann(0, 0.5, 0.5, 0.4, 0.4)],
        }
        preds = {
            "img1": [ann(0, 0.3, 0.3, 0.2, 0.2, conf=0.9),
                     ann(1, 0.7, 0.7, 0.2, 0.2, conf=0.8)],
            "img2": [ann(0, 0.5, 0.5, 0.4, 0.4, conf=0.95)],
        }
        return cmap, gts, preds

    def test_perfect_predictions(self):
        cmap, gts, preds = self.make_dataset()
        rep = evaluate(gts, preds, cmap)
        for row in rep.per_class:
            assert row.precision == 1.0
            assert row.recall == 1.0
            assert row.ap50 == 1.0
            assert row.ap50_95 == 1.0
        assert rep.all_row.ap50_95 == 1.0
        assert rep.all_row.instances == 3
        assert rep.all_row.images == 3  # class 0 in 2 images, class 1 in 1

    def test_constant_ap_threshold_counting(self):
        # predictions at IoU ~0.72 with their gts: AP 1 for t <= 0.70
        cmap = ClassMap(["a"])
        # boxes [0,0.5]x[0,1] vs [0.08,0.58]x[0,1]: inter 0.42/union 0.58
        g = {"i": [ann(0, 0.25, 0.5, 0.5, 1.0)]}
        p = {"i": [ann(0, 0.33, 0.5, 0.5, 1.0, conf=0.9)]}
        iou = box_iou(g["i"][0].bbox, p["i"][0].bbox)
        assert 0.70 < iou < 0.75
        rep = evaluate(g, p, cmap)
        assert rep.per_class[0].ap50 == 1.0
        assert rep.per_class[0].ap50_95 == pytest.approx(0.5, abs=1e-12)

    def test_zero_predictions(self):
        cmap, gts, _ = self.make_dataset()
        rep = evaluate(gts, {}, cmap)
        for row in rep.per_class:
            assert row.ap50 == 0.0
            assert row.recall == 0.0

    def test_map50_geq_map5095_randomized(self, rng):
        cmap = ClassMap(["a", "b"])
        for _ in range(100):
            gts, preds = {}, {}
            for img in ("x", "y"):
                gts[img] = [Annotation(rng.randrange(2), random_bbox(rng))
                            for _ in range(rng.randint(0, 3))]
                preds[img] = [Annotation(rng.randrange(2), random_bbox(rng),
                                         confidence=round(rng.random(), 3))
                              for _ in range(rng.randint(0, 3))]
            rep = evaluate(gts, preds, cmap)
            for row in rep.per_class + [rep.all_row]:
                assert row.ap50 >= row.ap50_95 - 1e-12

    def test_ap_monotone_in_threshold(self, rng):
        cmap = ClassMap(["a"])
        for _ in range(100):
            gts = {"i": [Annotation(0, random_bbox(rng))
                         for _ in range(rng.randint(1, 3))]}
            preds = {"i": [Annotation(0, random_bbox(rng),
                                      confidence=round(rng.random(), 3))
                           for _ in range(rng.randint(0, 3))]}
            prev = 1.1
            for t in MAP5095_THRESHOLDS:
                rep = evaluate(gts, preds, cmap, iou_thresholds=[t])
                ap = rep.per_class[0].ap50
                assert ap <= prev + 1e-12
                prev = ap

    def test_mask_geometry_exact_match(self):
        cmap = ClassMap(["a"])
        tri = [(0.1, 0.1), (0.8, 0.2), (0.4, 0.9)]
        gts = {"i": [Annotation.from_polygon(0, tri)]}
        preds = {"i": [Annotation.from_polygon(0, tri, confidence=0.9)]}
        rep = evaluate(gts, preds, cmap, geometry="mask", mask_size=(48, 48))
        assert rep.per_class[0].ap50_95 == 1.0


class TestConfusion:
    def test_perfect_single_class(self):
        cmap = ClassMap.default()
        gts = {"i": [ann(3, 0.5, 0.5, 0.4, 0.4)]}
        preds = {"i": [ann(3, 0.5, 0.5, 0.4, 0.4, conf=0.9)]}
        raw = confusion_matrix(gts, preds, cmap)
        norm = normalize_confusion(raw)
        assert norm[3, 3] == 1.0

    def test_cross_class_mislabel(self):
        cmap = ClassMap.default()
        gts = {"i": [ann(4, 0.5, 0.5, 0.4, 0.4)]}
        preds = {"i": [ann(3, 0.5, 0.5, 0.4, 0.4, conf=0.9)]}
        norm = normalize_confusion(confusion_matrix(gts, preds, cmap))
        assert norm[3, 4] == 1.0
        assert norm[4, 4] == 0.0

    def test_no_predictions_background_row(self):
        cmap = ClassMap.default()
        gts = {"i": [ann(0, 0.3, 0.3, 0.2, 0.2), ann(4, 0.7, 0.7, 0.2, 0.2)]}
        norm = normalize_confusion(confusion_matrix(gts, {}, cmap))
        assert norm[5, 0] == 1.0
        assert norm[5, 4] == 1.0

    def test_columns_sum_to_one(self, rng):
        cmap = ClassMap(["a", "b", "c"])
        for _ in range(50):
            gts, preds = {}, {}
            for img in ("x", "y", "z"):
                gts[img] = [Annotation(rng.randrange(3), random_bbox(rng))
                            for _ in range(rng.randint(0, 3))]
                preds[img] = [Annotation(rng.randrange(3), random_bbox(rng),
                                         confidence=round(rng.random(), 3))
                              for _ in range(rng.randint(0, 3))]
            norm = normalize_confusion(confusion_matrix(gts, preds, cmap))
            sums = norm.sum(axis=0)
            for s in sums:
                assert s == pytest.approx(1.0, abs=1e-9) or s == 0.0

    def test_matches_naive_oracle(self, rng):
        cmap = ClassMap(["a", "b"])
        for _ in range(100):
            images = []
            gts, preds = {}, {}
            for idx in range(rng.randint(1, 3)):
                img = f"im{idx}"
                g = [(rng.randrange(2), random_bbox(rng))
                     for _ in range(rng.randint(0, 4))]
                p = [(rng.randrange(2), random_bbox(rng),
                      round(rng.random(), 3))
                     for _ in range(rng.randint(0, 4))]
                images.append((g, p))
                gts[img] = [Annotation(c, b) for c, b in g]
                preds[img] = [Annotation(c, b, confidence=cf)
                              for c, b, cf in p]
            raw = confusion_matrix(gts, preds, cmap, iou_threshold=0.45,
                                   conf_threshold=0.25)
            want = naive_confusion(images, 2, 0.45, 0.25)
            assert raw.tolist() == want
            got_norm = normalize_confusion(raw)
            want_norm = normalize_columns(want)
            assert np.allclose(got_norm, np.array(want_norm), atol=1e-9)
