"""Line-delimited dataset serialization.

One JSON object per line per sample. Feature values are written with 9
significant digits, which is exactly enough for a lossless binary32
round-trip, keeping files diffable without ballooning them with full
float64 reprs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .schema import ClinicalContext, DatasetError, DatasetSplit, RegionRecord, Sample


def _format_feature(feature: np.ndarray) -> str:
    return "[" + ",".join("%.9g" % v for v in np.asarray(feature, dtype=np.float32)) + "]"


def _sample_to_line(sample: Sample) -> str:
    region_parts = []
    for r in sample.regions_in_order():
        record = {
            "region_id": r.region_id,
            "region_name": r.region_name,
            "box": list(r.box) if r.box is not None else None,
            "gold_sentence": r.gold_sentence,
            "has_sentence": r.has_sentence,
            "is_abnormal": r.is_abnormal,
        }
        encoded = json.dumps(record, sort_keys=True)
        # Splice the compact feature array in; keeps the hot loop out of json.
        region_parts.append(encoded[:-1] + ',"feature":' + _format_feature(r.feature) + "}")
    head = json.dumps({
        "sample_id": sample.sample_id,
        "clinical_context": sample.clinical_context.to_dict(),
        "reference_report": sample.reference_report,
    }, sort_keys=True)
    return head[:-1] + ',"regions":[' + ",".join(region_parts) + "]}"


def save_split(split: DatasetSplit, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample in split.samples:
            fh.write(_sample_to_line(sample))
            fh.write("\n")


def _record_from_dict(d: dict) -> RegionRecord:
    box = d.get("box")
    return RegionRecord(
        region_id=int(d["region_id"]),
        region_name=str(d["region_name"]),
        feature=np.asarray(d["feature"], dtype=np.float32),
        box=tuple(float(v) for v in box) if box is not None else None,
        gold_sentence=d.get("gold_sentence"),
        has_sentence=bool(d.get("has_sentence", False)),
        is_abnormal=bool(d.get("is_abnormal", False)),
    )


def load_dataset(path, name: str | None = None) -> DatasetSplit:
    """Parse and validate a line-delimited dataset file.

    Failures carry the 1-based line number. An empty file is a valid empty
    split; the split name defaults to the file stem when recognizable.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    if name is None:
        stem = path.stem.lower()
        name = stem if stem in ("train", "validation", "test") else "test"

    samples: list[Sample] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}: line {lineno}: malformed JSON: {exc}") from exc
            try:
                sample = Sample(
                    sample_id=str(obj["sample_id"]),
                    regions=[_record_from_dict(r) for r in obj["regions"]],
                    clinical_context=ClinicalContext.from_dict(obj.get("clinical_context", {})),
                    reference_report=str(obj.get("reference_report", "")),
                )
                sample.validate()
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetError(f"{path}: line {lineno}: {exc}") from exc
            if sample.sample_id in seen_ids:
                raise DatasetError(f"{path}: line {lineno}: duplicate sample_id {sample.sample_id!r}")
            seen_ids.add(sample.sample_id)
            samples.append(sample)
    return DatasetSplit(name=name, samples=samples)
