"""Training configuration and the per-epoch log."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


class TrainingError(RuntimeError):
    """Invalid stage sequencing, missing prerequisites, or hash mismatches."""


@dataclass
class TrainConfig:
    stage: int
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3      # classifier heads
    decoder_learning_rate: float = 3e-4
    weight_decay: float = 0.01
    decay_factor: float = 0.5        # LR multiplier on plateau
    patience: int = 5                # early-stop patience, epochs
    decay_patience: int = 2          # plateau length before LR decay
    min_delta: float = 1e-5          # improvement = strict decrease by at least this
    seed: int = 0
    train_l1: bool = True            # sentence-detection loss
    train_l2: bool = True            # abnormality-detection loss

    def __post_init__(self):
        if self.stage not in (1, 2, 3):
            raise ValueError(f"stage must be 1, 2, or 3, got {self.stage}")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 < self.decay_factor <= 1.0:
            raise ValueError("decay_factor must lie in (0, 1]")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    learning_rate: float
    f1_sentence: float | None = None
    f1_abnormal: float | None = None
    token_accuracy: float | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class TrainLog:
    stage: int
    epochs: list[EpochRecord] = field(default_factory=list)
    stop_reason: str = "max_epochs"  # max_epochs | early_stop | fixture
    notice: str | None = None

    def validate(self) -> None:
        for i, record in enumerate(self.epochs, start=1):
            if record.epoch != i:
                raise ValueError(f"epoch indices not monotone at position {i}")
        lrs = [r.learning_rate for r in self.epochs]
        if any(later > earlier for earlier, later in zip(lrs, lrs[1:])):
            raise ValueError("learning-rate trace increased")
        if self.stop_reason not in ("max_epochs", "early_stop", "fixture"):
            raise ValueError(f"unknown stop reason {self.stop_reason!r}")

    def val_losses(self) -> list[float]:
        return [r.val_loss for r in self.epochs]

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for record in self.epochs:
                fh.write(json.dumps({"type": "epoch", "stage": self.stage, **record.to_dict()}) + "\n")
            summary = {"type": "summary", "stage": self.stage, "stop_reason": self.stop_reason}
            if self.notice:
                summary["notice"] = self.notice
            fh.write(json.dumps(summary) + "\n")
