"""Staged training loops, early stopping, and pipeline checkpoints."""

from .config import EpochRecord, TrainConfig, TrainLog, TrainingError
from .state import PipelineState, init_state
from .loop import early_stop, run_stage
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "EpochRecord",
    "PipelineState",
    "TrainConfig",
    "TrainLog",
    "TrainingError",
    "early_stop",
    "init_state",
    "load_checkpoint",
    "run_stage",
    "save_checkpoint",
]
