"""eroscan: fluvial-erosion analysis engine.

Tiling of large orthophoto rasters, YOLO-style label handling, dataset
splitting and augmentation, polygon rasterization into binary masks,
erosion-area estimation in pixels or m², instance-segmentation metrics,
and an HTTP service for interactive analysis.
"""

__version__ = "0.1.0"

from .labels import Annotation, BBox, ClassMap, LabelFile  # noqa: F401
from .mask import AreaResult, PixelScale  # noqa: F401
from .tiling import PixelRect, Raster  # noqa: F401
