import random

import pytest

from eroscan.errors import (
    ConfidenceOutOfRange,
    MalformedLine,
    MissingConfidence,
)
from eroscan.predictions import (
    confidence_filter,
    parse_prediction_line,
    parse_prediction_text,
    serialize_predictions,
)

from conftest import random_annotation


class TestParsePrediction:
    def test_bbox_with_confidence(self):
        p = parse_prediction_line("3 0.5 0.5 0.2 0.4 0.91")
        assert p.class_id == 3
        assert p.confidence == 0.91
        assert p.bbox.w == 0.2

    def test_full_image_polygon_conf_one(self):
        p = parse_prediction_line("0 0 0 1 0 1 1 0 1 1.0")
        assert p.confidence == 1.0
        assert len(p.polygon) == 4

    def test_confidence_out_of_range(self):
        with pytest.raises(ConfidenceOutOfRange):
            parse_prediction_line("3 0.5 0.5 0.2 0.4 1.5")

    def test_missing_confidence(self):
        # 4 tokens after class id: bbox consumed them, none left
        with pytest.raises((MissingConfidence, MalformedLine)):
            parse_prediction_line("3 0.5 0.5 0.2", mode="bbox")

    def test_order_preserved(self):
        text = ("3 0.5 0.5 0.2 0.4 0.9\n"
                "4 0.4 0.4 0.1 0.1 0.3\n"
                "0 0.6 0.6 0.2 0.2 0.7\n")
        preds = parse_prediction_text(text)
        assert [p.class_id for p in preds] == [3, 4, 0]

    def test_roundtrip_with_confidence(self, rng):
        preds = []
        for _ in range(20):
            ann = random_annotation(rng)
            preds.append(type(ann)(ann.class_id, ann.bbox, ann.polygon,
                                   round(rng.random(), 4)))
        text = serialize_predictions(preds, "polygon")
        back = parse_prediction_text(text, mode="polygon")
        text2 = serialize_predictions(back, "polygon")
        assert text == text2
        assert [p.confidence for p in back] == \
            [pytest.approx(p.confidence, abs=1e-6) for p in preds]


class TestConfidenceFilter:
    def make(self, confs):
        return parse_prediction_text(
            "".join(f"3 0.5 0.5 0.2 0.2 {c}\n" for c in confs))

    def test_threshold_zero_identity(self):
        preds = self.make([0.3, 0.7, 0.9])
        assert confidence_filter(preds, 0.0) == preds

    def test_threshold_one(self):
        preds = self.make([0.3, 1.0, 0.9])
        kept = confidence_filter(preds, 1.0)
        assert [p.confidence for p in kept] == [1.0]

    def test_mixed(self):
        preds = self.make([0.3, 0.7, 0.9])
        kept = confidence_filter(preds, 0.5)
        assert [p.confidence for p in kept] == [0.7, 0.9]

    def test_monotone(self, rng):
        preds = self.make([round(rng.random(), 3) for _ in range(30)])
        prev = set(id(p) for p in preds)
        for t in (0.1, 0.3, 0.5, 0.7, 0.9):
            kept = confidence_filter(preds, t)
            assert set(id(p) for p in kept) <= prev
            prev = set(id(p) for p in kept)

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            confidence_filter([], 1.5)
