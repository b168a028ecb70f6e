"""Per-region visual features: projection, box overlap, mock detection.

The real detector is out of scope; a deterministic fixture returns stored
features plus boxes sampled around the shipped anatomical layout table, so
the rest of the pipeline (and its tests) run end to end without images.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data.regions import REGION_COUNT, region_names
from .data.schema import FEATURE_DIM, Box, Sample
from .data.synthetic import IMAGE_SIZE, layout_box_pixels
from .nncore import DenseLayer, ShapeError, as_matrix, require_finite

KEY_REGIONS = ("right lung", "left lung", "spine", "mediastinum", "cardiac silhouette", "abdomen")


@dataclass
class RegionFeatureSet:
    """Visual features for the 29 regions, optionally with boxes."""

    features: np.ndarray  # [29, 1024]
    boxes: list[Box] | None = None

    def __post_init__(self):
        self.features = as_matrix(self.features, "region features")
        if self.features.shape != (REGION_COUNT, FEATURE_DIM):
            raise ShapeError(
                f"region features must be [{REGION_COUNT}, {FEATURE_DIM}], "
                f"got {self.features.shape}"
            )
        if self.boxes is not None and len(self.boxes) != REGION_COUNT:
            raise ShapeError(f"expected {REGION_COUNT} boxes, got {len(self.boxes)}")

    @classmethod
    def from_sample(cls, sample: Sample) -> "RegionFeatureSet":
        records = sample.regions_in_order()
        return cls(
            features=sample.feature_matrix(),
            boxes=[r.box for r in records] if all(r.box for r in records) else None,
        )


def project_features(raw, proj: DenseLayer) -> RegionFeatureSet:
    """Row-wise dense map of raw pooled features into the 1024-dim space."""
    raw = as_matrix(raw, "raw features")
    if raw.shape[0] != REGION_COUNT:
        raise ShapeError(f"raw features must have {REGION_COUNT} rows, got {raw.shape[0]}")
    if proj.d_out != FEATURE_DIM:
        raise ShapeError(f"projection must map into {FEATURE_DIM} dims, maps into {proj.d_out}")
    projected = proj.forward(raw)
    require_finite(projected, "projected features")
    return RegionFeatureSet(features=projected)


def _check_box(box: Box, name: str) -> Box:
    x1, y1, x2, y2 = (float(v) for v in box)
    if not (x1 < x2 and y1 < y2):
        raise ValueError(f"degenerate box {name}={box}: need x1<x2 and y1<y2")
    return (x1, y1, x2, y2)


def iou(a: Box, b: Box) -> float:
    """Intersection-over-union of two corner-convention boxes."""
    ax1, ay1, ax2, ay2 = _check_box(a, "a")
    bx1, by1, bx2, by2 = _check_box(b, "b")
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    return inter / union


def iou_matrix(boxes_a, boxes_b) -> np.ndarray:
    """Pairwise IoU between two box arrays, [n, 4] x [m, 4] -> [n, m].

    Same corner-convention math as :func:`iou`, vectorized for
    detection-style sweeps over many box pairs.
    """
    a = np.asarray(boxes_a, dtype=np.float64)
    b = np.asarray(boxes_b, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != 4 or b.ndim != 2 or b.shape[1] != 4:
        raise ValueError("box arrays must be [n, 4]")
    if np.any(a[:, 0] >= a[:, 2]) or np.any(a[:, 1] >= a[:, 3]) or \
            np.any(b[:, 0] >= b[:, 2]) or np.any(b[:, 1] >= b[:, 3]):
        raise ValueError("degenerate box: need x1<x2 and y1<y2")
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    return inter / (area_a[:, None] + area_b[None, :] - inter)


def mock_detect(sample: Sample, jitter: float = 0.0, seed: int = 0,
                image_size: int = IMAGE_SIZE) -> RegionFeatureSet:
    """Deterministic detector stand-in.

    Returns the sample's stored features with boxes from the anatomical
    layout table, each corner perturbed by up to ``jitter`` of the box's own
    width/height (uniform, seeded).
    """
    if jitter < 0:
        raise ValueError("jitter must be >= 0")
    rng = np.random.default_rng(seed)
    boxes: list[Box] = []
    for name in region_names():
        x1, y1, x2, y2 = layout_box_pixels(name, image_size)
        if jitter > 0:
            w, h = x2 - x1, y2 - y1
            dx1, dx2, dy1, dy2 = rng.uniform(-jitter, jitter, size=4)
            x1, x2 = x1 + dx1 * w, x2 + dx2 * w
            y1, y2 = y1 + dy1 * h, y2 + dy2 * h
            if x1 >= x2:
                x2 = x1 + 1e-3 * w
            if y1 >= y2:
                y2 = y1 + 1e-3 * h
        boxes.append((x1, y1, x2, y2))
    return RegionFeatureSet(features=sample.feature_matrix(), boxes=boxes)


def region_iou_report(
    pred_boxes: list[list[Box]], gold_boxes: list[list[Box]]
) -> dict[str, float]:
    """Per-region mean IoU over a split.

    Both arguments are per-sample lists of 29 aligned boxes. Returns
    region name -> mean IoU for all 29 regions; the six key regions are
    available as :data:`KEY_REGIONS` for highlighted reporting.
    """
    if len(pred_boxes) != len(gold_boxes):
        raise ValueError(
            f"pred has {len(pred_boxes)} samples, gold has {len(gold_boxes)}"
        )
    if not pred_boxes:
        raise ValueError("empty box lists")
    names = region_names()
    totals = np.zeros(REGION_COUNT)
    for pred_row, gold_row in zip(pred_boxes, gold_boxes):
        if len(pred_row) != REGION_COUNT or len(gold_row) != REGION_COUNT:
            raise ValueError("each sample must carry exactly 29 aligned boxes")
        for i, (p, g) in enumerate(zip(pred_row, gold_row)):
            totals[i] += iou(p, g)
    means = totals / len(pred_boxes)
    return {name: float(means[i]) for i, name in enumerate(names)}
