import math
import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eroscan.labels import Annotation, BBox


def random_simple_polygon(rng: random.Random, n_min=3, n_max=8,
                          margin=0.05):
    """Star-shaped polygon around a random center: always simple."""
    n = rng.randint(n_min, n_max)
    cx = rng.uniform(0.35, 0.65)
    cy = rng.uniform(0.35, 0.65)
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
    # reject near-duplicate angles (degenerate edges) and gaps over pi,
    # where the star construction stops being simple
    gaps = [(angles[(i + 1) % n] - angles[i]) % (2 * math.pi)
            for i in range(n)]
    if min(gaps) < 0.05 or max(gaps) > 2.8:
        return random_simple_polygon(rng, n_min, n_max, margin)
    # radii small enough that no vertex needs clamping: star shape stays
    # simple by construction
    radii = [rng.uniform(0.08, 0.28) for _ in angles]
    pts = [(cx + r * math.cos(a), cy + r * math.sin(a))
           for a, r in zip(angles, radii)]
    return pts


def random_bbox(rng: random.Random) -> BBox:
    w = rng.uniform(0.05, 0.5)
    h = rng.uniform(0.05, 0.5)
    xc = rng.uniform(w / 2, 1 - w / 2)
    yc = rng.uniform(h / 2, 1 - h / 2)
    return BBox(xc, yc, w, h)


def random_annotation(rng: random.Random, n_classes=5,
                      polygon=True) -> Annotation:
    cid = rng.randrange(n_classes)
    if polygon:
        return Annotation.from_polygon(cid, random_simple_polygon(rng))
    return Annotation(cid, random_bbox(rng))


@pytest.fixture
def rng():
    return random.Random(1234)
