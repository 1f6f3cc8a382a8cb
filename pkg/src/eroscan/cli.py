"""Command-line entry point stitching the pipeline together:
tile -> convert -> split -> augment -> mask -> area -> eval -> serve."""

from __future__ import annotations

import sys
from functools import wraps
from pathlib import Path

import click
import numpy as np
from PIL import Image

from . import __version__, augment as aug, tiling
from .errors import EngineError
from .labels import (
    EROSION_CLASS_ID,
    ClassMap,
    parse_label_text,
    serialize_label_file,
    split_dataset,
)
from .mask import (
    PixelScale,
    area as mask_area,
    load_mask_png,
    rasterize,
    save_mask_png,
)
from .predictions import parse_prediction_text
from .evaluate import MAP5095_THRESHOLDS, evaluate
from .report import write_report


def engine_errors(f):
    """Map engine errors to exit 1 with a one-line machine-parseable class."""

    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except EngineError as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _load_raster(path: str, gsd: float | None = None) -> tiling.Raster:
    img = Image.open(path)
    if img.mode not in ("L", "RGB"):
        img = img.convert("RGB")
    return tiling.Raster(np.asarray(img).copy(), gsd=gsd)


def _save_raster(r: tiling.Raster, path: Path) -> None:
    Image.fromarray(r.data).save(path)


@click.group()
@click.version_option(__version__)
def main():
    """Fluvial-erosion analysis toolkit."""


@main.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True))
@click.option("--gsd", type=float, default=None,
              help="Ground sample distance, meters per pixel side.")
@click.option("--tile-m", type=float, default=None,
              help="Physical tile side in meters (requires --gsd).")
@click.option("--grid", default=None, help="RxC equal grid, e.g. 2x3.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@engine_errors
def tile(input_path, gsd, tile_m, grid, out_dir):
    """Cut a raster into tiles; writes PNGs plus a manifest."""
    if (tile_m is None) == (grid is None):
        raise click.UsageError("give exactly one of --tile-m or --grid")
    r = _load_raster(input_path, gsd=gsd)
    if tile_m is not None:
        tiles = tiling.tile_by_ground_size(r, tile_m)
    else:
        try:
            rows, cols = (int(v) for v in grid.lower().split("x"))
        except ValueError:
            raise click.UsageError(f"bad --grid value {grid!r}")
        tiles = tiling.tile_grid(r, rows, cols)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(input_path).stem
    for t in tiles:
        _save_raster(t.raster, out / f"{stem}_r{t.row}_c{t.col}.png")
    manifest = out / f"{stem}_tiles.txt"
    manifest.write_text(
        "\n".join(tiling.manifest_lines(tiles, stem)) + "\n", encoding="utf-8")
    click.echo(f"tiles={len(tiles)} manifest={manifest}")


@main.command()
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--to", "target_mode", type=click.Choice(["bbox", "polygon"]),
              required=True)
@engine_errors
def convert(in_dir, out_dir, target_mode):
    """Rewrite label files in the target mode (polygon -> bbox only)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = 0
    for path in sorted(Path(in_dir).glob("*.txt")):
        lf = parse_label_text(path.read_text(encoding="utf-8"),
                              image_id=path.stem)
        (out / path.name).write_text(
            serialize_label_file(lf, target_mode), encoding="utf-8")
        n += 1
    click.echo(f"converted={n}")


@main.command()
@click.option("--root", required=True, type=click.Path(exists=True),
              help="Directory whose image files (or ids file) are split.")
@click.option("--frac", default="0.88,0.06,0.06", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Manifest path (default: <root>/splits.txt).")
@engine_errors
def split(root, frac, seed, out_path):
    """Deterministically assign items to train/val/test."""
    try:
        fractions = tuple(float(v) for v in frac.split(","))
        assert len(fractions) == 3
    except (ValueError, AssertionError):
        raise click.UsageError(f"bad --frac value {frac!r}")
    root_p = Path(root)
    items = sorted(p.name for p in root_p.iterdir() if p.is_file())
    assignment = split_dataset(items, fractions, seed)
    lines = [f"{name}\t{item}" for name in ("train", "val", "test")
             for item in assignment[name]]
    manifest = Path(out_path) if out_path else root_p / "splits.txt"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sizes = {k: len(v) for k, v in assignment.items()}
    click.echo(f"train={sizes['train']} val={sizes['val']} "
               f"test={sizes['test']} manifest={manifest}")


def _parse_ops(spec: str) -> list[aug.AugmentOp]:
    ops = []
    for tok in spec.split(","):
        tok = tok.strip()
        if tok == "gray":
            ops.append(aug.AugmentOp("grayscale"))
        elif tok.startswith("rot90"):
            k = int(tok.split(":")[1]) if ":" in tok else 1
            ops.append(aug.AugmentOp("rotate90", k=k))
        elif tok.startswith("zoom"):
            factor = float(tok.split(":")[1]) if ":" in tok else 2.0
            ops.append(aug.AugmentOp("zoom", factor=factor))
        else:
            raise click.UsageError(f"unknown augmentation {tok!r}")
    return ops


@main.command("augment")
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True),
              help="Directory with images and sibling .txt polygon labels.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--ops", required=True,
              help="Comma list: gray,rot90[:k],zoom[:factor]")
@click.option("--seed", type=int, default=0, show_default=True)
@engine_errors
def augment_cmd(in_dir, out_dir, ops, seed):
    """Apply label-preserving augmentations; writes a provenance manifest."""
    op_list = _parse_ops(ops)
    spec = aug.AugmentSpec(tuple(op_list), seed=seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sources = []
    for img_path in sorted(Path(in_dir).iterdir()):
        if img_path.suffix.lower() not in (".png", ".jpg", ".jpeg"):
            continue
        label_path = img_path.with_suffix(".txt")
        text = label_path.read_text(encoding="utf-8") \
            if label_path.exists() else ""
        lf = parse_label_text(text, image_id=img_path.stem)
        sources.append(aug.SourceItem(img_path.stem,
                                      _load_raster(str(img_path)), lf))
    items = aug.expand_dataset(sources, {s.image_id: [spec] for s in sources})
    for it in items:
        stem = it.labels.image_id
        _save_raster(it.raster, out / f"{stem}.png")
        mode = "polygon" if any(a.polygon for a in it.labels.annotations) \
            else "bbox"
        (out / f"{stem}.txt").write_text(
            serialize_label_file(it.labels, mode), encoding="utf-8")
    manifest = out / "provenance.tsv"
    manifest.write_text(
        "\n".join(aug.provenance_lines(items)) + "\n", encoding="utf-8")
    click.echo(f"items={len(items)} manifest={manifest}")


@main.command("mask")
@click.option("--labels", "labels_path", required=True,
              type=click.Path(exists=True))
@click.option("--size", required=True, help="WxH in pixels, e.g. 640x640.")
@click.option("--class", "class_id", type=int, default=EROSION_CLASS_ID,
              show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@engine_errors
def mask_cmd(labels_path, size, class_id, out_path):
    """Rasterize one class's polygons into a 0/255 PNG mask."""
    try:
        w, h = (int(v) for v in size.lower().split("x"))
    except ValueError:
        raise click.UsageError(f"bad --size value {size!r}")
    lf = parse_label_text(Path(labels_path).read_text(encoding="utf-8"),
                          class_map=ClassMap.default())
    m = rasterize(lf.annotations, class_id, w, h)
    save_mask_png(m, out_path)
    click.echo(f"mask={out_path} white_pixels={int((m == 255).sum())}")


@main.command("area")
@click.option("--mask", "mask_path", required=True,
              type=click.Path(exists=True))
@click.option("--px-side", type=float, default=None,
              help="Pixel side length in meters.")
@click.option("--px-area", type=float, default=None,
              help="Pixel area in square meters.")
@engine_errors
def area_cmd(mask_path, px_side, px_area):
    """Count white pixels; convert to m² when a pixel scale is given."""
    if px_side is not None and px_area is not None:
        raise click.UsageError("give at most one of --px-side / --px-area")
    scale = None
    if px_side is not None:
        scale = PixelScale("pixel_side_m", px_side)
    elif px_area is not None:
        scale = PixelScale("pixel_area_m2", px_area)
    result = mask_area(load_mask_png(mask_path), scale)
    if result.area_m2 is not None:
        click.echo(f"pixels={result.pixel_count} area_m2={result.area_m2:g}")
    else:
        click.echo(f"pixels={result.pixel_count}")


@main.command("eval")
@click.option("--gt", "gt_dir", required=True, type=click.Path(exists=True))
@click.option("--pred", "pred_dir", required=True,
              type=click.Path(exists=True))
@click.option("--geometry", type=click.Choice(["box", "mask"]),
              default="box", show_default=True)
@click.option("--mask-size", default="64x64", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@engine_errors
def eval_cmd(gt_dir, pred_dir, geometry, mask_size, out_dir):
    """Evaluate predictions against ground truth; writes the metric table,
    confusion matrix, and figures."""
    try:
        w, h = (int(v) for v in mask_size.lower().split("x"))
    except ValueError:
        raise click.UsageError(f"bad --mask-size value {mask_size!r}")
    cmap = ClassMap.default()
    gts, preds = {}, {}
    for path in sorted(Path(gt_dir).glob("*.txt")):
        lf = parse_label_text(path.read_text(encoding="utf-8"),
                              class_map=cmap, image_id=path.stem)
        gts[path.stem] = lf.annotations
    for path in sorted(Path(pred_dir).glob("*.txt")):
        preds[path.stem] = parse_prediction_text(
            path.read_text(encoding="utf-8"), class_map=cmap)
    report = evaluate(gts, preds, cmap, geometry=geometry, mask_size=(w, h),
                      iou_thresholds=MAP5095_THRESHOLDS)
    paths = write_report(report, Path(out_dir))
    for p in paths:
        click.echo(f"wrote {p}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--upstream", default=None,
              help="External predictor endpoint URL.")
@click.option("--timeout", type=float, default=30.0, show_default=True)
@click.option("--max-bytes", type=int, default=25 * 1024 * 1024,
              show_default=True)
@click.option("--ui-dir", default=None, type=click.Path(),
              help="Static directory with the built browser UI.")
def serve(host, port, upstream, timeout, max_bytes, ui_dir):
    """Run the HTTP analysis service."""
    import uvicorn

    from .service import ServiceConfig, create_app

    app = create_app(ServiceConfig(
        max_payload_bytes=max_bytes,
        upstream_url=upstream,
        upstream_timeout=timeout,
        ui_dir=ui_dir,
    ))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
