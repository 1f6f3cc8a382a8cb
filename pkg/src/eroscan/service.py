"""HTTP analysis service: upload an image plus predictions, get back the
class-colored overlay, the erosion mask, and the area estimate."""

from __future__ import annotations

import base64
import binascii
import io
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Literal, Optional, Tuple

import httpx
import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel

from . import __version__
from .errors import EngineError
from .labels import EROSION_CLASS_ID, ClassMap
from .mask import (
    DEFAULT_CLASS_COLORS,
    AreaResult,
    PixelScale,
    area,
    encode_png,
    filter_class,
    overlay,
    rasterize_per_class,
)
from .predictions import parse_prediction_text

MAX_PAYLOAD_DEFAULT = 25 * 1024 * 1024
UPSTREAM_TIMEOUT_DEFAULT = 30.0


@dataclass
class ServiceConfig:
    max_payload_bytes: int = MAX_PAYLOAD_DEFAULT
    upstream_url: Optional[str] = None
    upstream_timeout: float = UPSTREAM_TIMEOUT_DEFAULT
    class_map: ClassMap = field(default_factory=ClassMap.default)
    class_colors: Dict[int, Tuple[int, int, int]] = field(
        default_factory=lambda: dict(DEFAULT_CLASS_COLORS))
    erosion_class_id: int = EROSION_CLASS_ID
    ui_dir: Optional[str] = None


class PixelScaleModel(BaseModel):
    mode: Literal["pixel_side_m", "pixel_area_m2"]
    value: float


class AnalyzeRequestModel(BaseModel):
    image_b64: str
    predictions: Optional[str] = None
    unit: Literal["px", "m2"] = "px"
    pixel_scale: Optional[PixelScaleModel] = None


class ProxyRequestModel(BaseModel):
    image_b64: str


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": code, "detail": detail})


def _decode_image(b64: str, max_bytes: int):
    try:
        raw = base64.b64decode(b64, validate=True)
    except (binascii.Error, ValueError):
        return None, _error(400, "UnsupportedFormat", "image is not valid base64")
    if len(raw) > max_bytes:
        return None, _error(413, "PayloadTooLarge",
                            f"image exceeds {max_bytes} bytes")
    try:
        img = Image.open(io.BytesIO(raw))
        fmt = img.format
        img = img.convert("RGB")
    except UnidentifiedImageError:
        return None, _error(400, "UnsupportedFormat", "image is not decodable")
    if fmt not in ("PNG", "JPEG"):
        return None, _error(400, "UnsupportedFormat",
                            f"format {fmt} not supported (.jpg/.png only)")
    return np.asarray(img), None


def _normalize_upstream(payload: dict, class_map: ClassMap) -> str:
    """Upstream detections -> extended-YOLO prediction lines."""
    lines = []
    for det in payload.get("detections", []):
        cid = int(det["class_id"])
        if cid not in class_map:
            raise EngineError(f"upstream returned class id {cid} "
                              "outside the class map")
        conf = float(det["confidence"])
        if "polygon" in det and det["polygon"]:
            coords = " ".join(f"{v:.6f}" for xy in det["polygon"] for v in xy)
        else:
            coords = " ".join(f"{v:.6f}" for v in det["bbox"])
        lines.append(f"{cid} {coords} {conf:.6f}")
    return "\n".join(lines) + ("\n" if lines else "")


async def _fetch_upstream(config: ServiceConfig, image_b64: str):
    """Returns (prediction_text, error_response)."""
    if not config.upstream_url:
        return None, _error(422, "NoUpstreamConfigured",
                            "no external predictor endpoint configured")
    try:
        async with httpx.AsyncClient(timeout=config.upstream_timeout) as client:
            resp = await client.post(config.upstream_url,
                                     json={"image_b64": image_b64})
    except httpx.TimeoutException:
        return None, _error(504, "UpstreamTimeout",
                            f"upstream exceeded {config.upstream_timeout}s")
    except httpx.HTTPError as exc:
        return None, _error(502, "UpstreamUnavailable", str(exc))
    if resp.status_code != 200:
        return None, _error(502, "UpstreamUnavailable",
                            f"upstream returned {resp.status_code}")
    try:
        text = _normalize_upstream(resp.json(), config.class_map)
    except EngineError as exc:
        return None, _error(422, "InvalidUpstreamPayload", str(exc))
    except (KeyError, TypeError, ValueError) as exc:
        return None, _error(502, "UpstreamUnavailable",
                            f"malformed upstream payload: {exc}")
    return text, None


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.ready = True
        yield
        app.state.ready = False

    app = FastAPI(title="eroscan", version=__version__, lifespan=lifespan)
    app.state.config = config
    app.state.ready = True

    @app.get("/health")
    async def health(request: Request):
        ready = getattr(request.app.state, "ready", False)
        return {"status": "ready" if ready else "not-ready",
                "version": __version__}

    @app.post("/analyze")
    async def analyze(req: AnalyzeRequestModel):
        img, err = _decode_image(req.image_b64, config.max_payload_bytes)
        if err:
            return err
        if req.unit == "m2" and req.pixel_scale is None:
            return _error(400, "MissingPixelScale",
                          "unit m2 requires pixel_scale")

        pred_text = req.predictions
        if pred_text is None:
            pred_text, err = await _fetch_upstream(config, req.image_b64)
            if err:
                if err.status_code == 422:
                    return _error(422, "NoPredictionsAvailable",
                                  "no predictions supplied and no upstream "
                                  "predictor configured")
                return err
        try:
            preds = parse_prediction_text(pred_text,
                                          class_map=config.class_map)
        except EngineError as exc:
            return _error(400, "MalformedPredictions", str(exc))

        h, w = img.shape[:2]
        masks = rasterize_per_class(preds, config.class_map, w, h)
        erosion = filter_class(masks, config.erosion_class_id,
                               config.class_map)
        scale = (PixelScale(req.pixel_scale.mode, req.pixel_scale.value)
                 if (req.unit == "m2" and req.pixel_scale) else None)
        result: AreaResult = area(erosion, scale)
        over = overlay(img, masks, config.class_colors)

        counts: Dict[str, int] = {}
        for p in preds:
            name = config.class_map.name(p.class_id)
            counts[name] = counts.get(name, 0) + 1

        body = {
            "overlay_png_b64": base64.b64encode(encode_png(over)).decode(),
            "erosion_mask_png_b64":
                base64.b64encode(encode_png(erosion)).decode(),
            "area": {"pixels": result.pixel_count},
            "per_class_counts": counts,
            "unit": req.unit,
        }
        if result.area_m2 is not None:
            body["area"]["area_m2"] = result.area_m2
        return body

    @app.post("/predict-proxy")
    async def predict_proxy(req: ProxyRequestModel):
        text, err = await _fetch_upstream(config, req.image_b64)
        if err:
            return err
        return {"predictions": text}

    if config.ui_dir and Path(config.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.ui_dir, html=True),
                  name="ui")
    return app
