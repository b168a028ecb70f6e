"""Sample schema mirroring the per-region label layout of Chest ImaGenome.

Each sample carries exactly 29 region records (feature vector, optional box,
optional gold sentence, two binary labels), a clinical context block, and a
reference report string.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .regions import REGION_COUNT, region_index

FEATURE_DIM = 1024

Box = tuple[float, float, float, float]


class DatasetError(ValueError):
    """Schema violation in a dataset record; message carries location info."""


@dataclass
class ClinicalContext:
    """Physician-supplied context: history, indication, reason for exam."""

    history: str = ""
    indication: str = ""
    reason_for_exam: str = ""

    def is_present(self) -> bool:
        return bool(self.history or self.indication or self.reason_for_exam)

    def to_dict(self) -> dict:
        return {
            "history": self.history,
            "indication": self.indication,
            "reason_for_exam": self.reason_for_exam,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClinicalContext":
        return cls(
            history=str(d.get("history", "")),
            indication=str(d.get("indication", "")),
            reason_for_exam=str(d.get("reason_for_exam", "")),
        )


@dataclass
class RegionRecord:
    region_id: int
    region_name: str
    feature: np.ndarray
    box: Box | None = None
    gold_sentence: str | None = None
    has_sentence: bool = False
    is_abnormal: bool = False

    def validate(self) -> None:
        if not 0 <= self.region_id < REGION_COUNT:
            raise DatasetError(f"region_id {self.region_id} outside 0..{REGION_COUNT - 1}")
        known = region_index()
        if self.region_name not in known:
            raise DatasetError(f"unknown region name {self.region_name!r}")
        if known[self.region_name] != self.region_id:
            raise DatasetError(
                f"region_name {self.region_name!r} does not match region_id {self.region_id}"
            )
        feat = np.asarray(self.feature)
        if feat.ndim != 1 or feat.shape[0] != FEATURE_DIM:
            raise DatasetError(
                f"region {self.region_name!r}: feature has length "
                f"{feat.shape[0] if feat.ndim == 1 else feat.shape}, expected {FEATURE_DIM}"
            )
        if not np.all(np.isfinite(feat)):
            raise DatasetError(f"region {self.region_name!r}: feature has non-finite values")
        if self.box is not None:
            x1, y1, x2, y2 = self.box
            if not (x1 < x2 and y1 < y2):
                raise DatasetError(
                    f"region {self.region_name!r}: degenerate box {self.box} (need x1<x2, y1<y2)"
                )


@dataclass
class Sample:
    sample_id: str
    regions: list[RegionRecord]
    clinical_context: ClinicalContext = field(default_factory=ClinicalContext)
    reference_report: str = ""

    def validate(self) -> None:
        if not self.sample_id:
            raise DatasetError("sample_id must be nonempty")
        if len(self.regions) != REGION_COUNT:
            raise DatasetError(
                f"sample {self.sample_id!r}: expected {REGION_COUNT} region records, "
                f"got {len(self.regions)}"
            )
        ids = sorted(r.region_id for r in self.regions)
        if ids != list(range(REGION_COUNT)):
            raise DatasetError(
                f"sample {self.sample_id!r}: region_ids are not a permutation of 0..{REGION_COUNT - 1}"
            )
        for record in self.regions:
            record.validate()

    def regions_in_order(self) -> list[RegionRecord]:
        return sorted(self.regions, key=lambda r: r.region_id)

    def feature_matrix(self) -> np.ndarray:
        """[29, 1024] float64 feature matrix in region-id order."""
        return np.stack([np.asarray(r.feature, dtype=np.float64) for r in self.regions_in_order()])


@dataclass
class DatasetSplit:
    name: str
    samples: list[Sample]

    def validate(self) -> None:
        if self.name not in ("train", "validation", "test"):
            raise DatasetError(f"split name {self.name!r} not in train/validation/test")
        seen: set[str] = set()
        for sample in self.samples:
            if sample.sample_id in seen:
                raise DatasetError(f"duplicate sample_id {sample.sample_id!r}")
            seen.add(sample.sample_id)
            sample.validate()

    def __len__(self) -> int:
        return len(self.samples)

    def by_id(self) -> dict[str, Sample]:
        return {s.sample_id: s for s in self.samples}
