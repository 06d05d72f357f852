"""Aerial-scene analysis: scale estimation, false-color composites,
vegetation/dryness/mineral index maps with threshold masks, and
cross-date trends.

The map scale comes from the known lake: its pixel bounding box gives a
diagonal length in pixels, and the surveyed 3000-foot length pins feet per
pixel. Index thresholds operate on the [0, 1] normalized bands; cloud (or
lake/ice) regions are excluded with user-supplied rectangles rather than
detected automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from enum import Enum

import numpy as np
from PIL import Image

from .errors import SceneError
from .ingest import MultiSpectralScene

FEET_PER_METER = 0.3048

# Annotation only; the rasters are never resampled. The lake's known
# north-south run fixes how the frames hang relative to the compass.
IMAGE_ORIENTATION = "north-east at top, south-west at bottom"


@dataclass(frozen=True)
class ScaleEstimate:
    feet_per_pixel: float
    meters_per_pixel: float
    image_extent_feet: float
    diag_pixels: float


class IndexKind(Enum):
    NDVI = "NDVI"
    B5_RAW = "B5raw"
    B6_RAW = "B6raw"


@dataclass(frozen=True)
class IndexMap:
    capture_date: date
    values: np.ndarray
    index_kind: IndexKind
    degenerate_count: int = 0  # NDVI pixels where B4 + B3 == 0, mapped to 0


@dataclass(frozen=True)
class ExclusionRect:
    x0: int
    y0: int
    x1: int
    y1: int  # inclusive bounds

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(f"degenerate exclusion rect {self}")

    def validate_within(self, shape: tuple[int, int]) -> None:
        h, w = shape
        if not (0 <= self.x0 and self.x1 < w and 0 <= self.y0 and self.y1 < h):
            raise ValueError(f"exclusion rect {self} outside {w}x{h} image")


@dataclass(frozen=True)
class SceneStats:
    capture_date: date
    fraction_vegetated: float
    fraction_dry: float
    fraction_mineral_rich: float
    excluded_pixel_count: int


@dataclass(frozen=True)
class FractionDelta:
    date_from: date
    date_to: date
    vegetated: float
    dry: float
    mineral_rich: float


def estimate_scale(
    lake_bbox_px: tuple[float, float],
    lake_length_feet: float,
    image_size_px: int = 650,
) -> ScaleEstimate:
    """Scale from the lake's pixel bounding box and surveyed length.

    The lake runs corner to corner of its box, so its pixel length is the
    box diagonal. Feet per pixel is truncated to 0.01 ft, the precision the
    surveyed length supports, so the derived whole-image extent carries no
    false precision.
    """
    w, h = lake_bbox_px
    if w <= 0 or h <= 0:
        raise ValueError(f"lake bbox must have positive dimensions, got {lake_bbox_px}")
    if lake_length_feet <= 0:
        raise ValueError("lake length must be positive")
    diag = math.hypot(w, h)
    feet_per_pixel = math.floor(lake_length_feet / diag * 100.0) / 100.0
    return ScaleEstimate(
        feet_per_pixel=feet_per_pixel,
        meters_per_pixel=feet_per_pixel * FEET_PER_METER,
        image_extent_feet=image_size_px * feet_per_pixel,
        diag_pixels=diag,
    )


def composite_false_color(scene: MultiSpectralScene, band_triple: tuple[str, str, str]) -> np.ndarray:
    """Stack three bands into an (H, W, 3) float composite clamped to [0, 1]."""
    for band_id in band_triple:
        if band_id not in scene.bands:
            raise SceneError(f"unknown band id {band_id!r}")
    rgb = np.stack([scene.bands[b] for b in band_triple], axis=-1)
    return np.clip(rgb, 0.0, 1.0)


def ndvi(scene: MultiSpectralScene) -> IndexMap:
    """(B4 - B3) / (B4 + B3) per pixel, in [-1, 1].

    Pixels with a zero denominator (no red or NIR signal, e.g. open water)
    are set to the vegetation-neutral 0 and tallied in degenerate_count.
    """
    b4 = scene.bands["B4"]
    b3 = scene.bands["B3"]
    denom = b4 + b3
    degenerate = denom == 0.0
    values = np.zeros_like(b4)
    np.divide(b4 - b3, denom, out=values, where=~degenerate)
    return IndexMap(scene.capture_date, values, IndexKind.NDVI,
                    degenerate_count=int(degenerate.sum()))


def band_index(scene: MultiSpectralScene, band_id: str) -> IndexMap:
    """Raw-band index map (B5 for dryness, B6 for soil minerals)."""
    kinds = {"B5": IndexKind.B5_RAW, "B6": IndexKind.B6_RAW}
    if band_id not in kinds:
        raise SceneError(f"band index supports B5/B6, got {band_id!r}")
    return IndexMap(scene.capture_date, scene.bands[band_id].copy(), kinds[band_id])


def exclusion_mask(shape: tuple[int, int], exclusions: list[ExclusionRect]) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for rect in exclusions:
        rect.validate_within(shape)
        mask[rect.y0:rect.y1 + 1, rect.x0:rect.x1 + 1] = True
    return mask


def threshold_mask(
    index: IndexMap,
    threshold: float,
    exclusions: list[ExclusionRect] | None = None,
) -> tuple[np.ndarray, float, int]:
    """Boolean mask of non-excluded pixels strictly above the threshold.

    Returns (mask, fraction of non-excluded pixels above threshold,
    excluded pixel count). Excluding every pixel leaves the fraction
    undefined and raises SceneError.
    """
    excluded = exclusion_mask(index.values.shape, exclusions or [])
    n_excluded = int(excluded.sum())
    n_valid = index.values.size - n_excluded
    if n_valid == 0:
        raise SceneError("exclusions cover the entire image; fraction undefined")
    mask = (index.values > threshold) & ~excluded
    fraction = float(mask.sum()) / n_valid
    return mask, fraction, n_excluded


def scene_stats(
    scene: MultiSpectralScene,
    exclusions: list[ExclusionRect] | None = None,
    ndvi_threshold: float = 0.1,
    b5_threshold: float = 0.7,
    b6_threshold: float = 0.7,
) -> SceneStats:
    """Vegetated / dry / mineral-rich fractions over non-excluded pixels."""
    _, veg, n_excluded = threshold_mask(ndvi(scene), ndvi_threshold, exclusions)
    _, dry, _ = threshold_mask(band_index(scene, "B5"), b5_threshold, exclusions)
    _, mineral, _ = threshold_mask(band_index(scene, "B6"), b6_threshold, exclusions)
    return SceneStats(scene.capture_date, veg, dry, mineral, n_excluded)


def trend_series(stats: list[SceneStats]) -> list[FractionDelta]:
    """Consecutive-date deltas of each fraction; a single scene gives none."""
    ordered = sorted(stats, key=lambda s: s.capture_date)
    deltas = []
    for prev, cur in zip(ordered, ordered[1:]):
        deltas.append(FractionDelta(
            prev.capture_date, cur.capture_date,
            cur.fraction_vegetated - prev.fraction_vegetated,
            cur.fraction_dry - prev.fraction_dry,
            cur.fraction_mineral_rich - prev.fraction_mineral_rich,
        ))
    return deltas


def write_composite_png(path, rgb: np.ndarray) -> None:
    data = np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path, format="PNG")


def write_index_pgm(path, index: IndexMap) -> None:
    """Binary PGM of the index map, linearly quantized to 0..255.

    NDVI maps [-1, 1] onto the byte range; raw bands map [0, 1].
    """
    values = index.values
    if index.index_kind == IndexKind.NDVI:
        scaled = (values + 1.0) / 2.0
    else:
        scaled = values
    data = np.clip(np.rint(scaled * 255.0), 0, 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())
