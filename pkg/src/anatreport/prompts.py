"""Sentence/abnormality classifier heads and the prompt converter.

Two binary heads score each region's 1024-dim feature: should the region
get a sentence, and is it abnormal. The converter turns thresholded flags
into the textual location (P1) and abnormality (P2) prompts consumed by the
LLM composition stage. Prompt wording lives in an editable template file.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .data.regions import REGION_COUNT, region_names
from .data.schema import FEATURE_DIM
from .features import RegionFeatureSet
from .nncore import DenseLayer, Parameter, binary_cross_entropy_rows, sigmoid

logger = logging.getLogger(__name__)

HEAD_DIMS = (FEATURE_DIM, 512, 128, 1)
DEFAULT_THRESHOLD = 0.5


class ClassifierHead:
    """Fixed 1024-512-128-1 MLP with ReLU hidden layers; output is a logit."""

    def __init__(self, rng: np.random.Generator | None = None, name: str = "head"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.name = name
        self.layers = [
            DenseLayer(HEAD_DIMS[0], HEAD_DIMS[1], "relu", rng, name=f"{name}.fc0"),
            DenseLayer(HEAD_DIMS[1], HEAD_DIMS[2], "relu", rng, name=f"{name}.fc1"),
            DenseLayer(HEAD_DIMS[2], HEAD_DIMS[3], "identity", rng, name=f"{name}.fc2"),
        ]

    def parameters(self) -> dict[str, Parameter]:
        out: dict[str, Parameter] = {}
        for layer in self.layers:
            out.update(layer.parameters())
        return out

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.grad[...] = 0.0

    def logits(self, x: np.ndarray) -> np.ndarray:
        h = np.asarray(x, dtype=np.float64)
        for layer in self.layers:
            h = layer.forward(h)
        return h[:, 0]

    def backward(self, d_logits: np.ndarray) -> None:
        d = np.asarray(d_logits, dtype=np.float64).reshape(-1, 1)
        for layer in reversed(self.layers):
            d = layer.backward(d)

    def probabilities(self, x: np.ndarray) -> np.ndarray:
        return sigmoid(self.logits(x))


@dataclass
class RegionFlags:
    """Per-region classifier outputs with thresholded decisions."""

    p_sentence: np.ndarray
    p_abnormal: np.ndarray
    threshold: float = DEFAULT_THRESHOLD
    selected: np.ndarray = field(init=False)
    abnormal: np.ndarray = field(init=False)

    def __post_init__(self):
        self.p_sentence = np.asarray(self.p_sentence, dtype=np.float64)
        self.p_abnormal = np.asarray(self.p_abnormal, dtype=np.float64)
        if self.p_sentence.shape != (REGION_COUNT,) or self.p_abnormal.shape != (REGION_COUNT,):
            raise ValueError(
                f"flags need {REGION_COUNT} probabilities per task, got "
                f"{self.p_sentence.shape} / {self.p_abnormal.shape}"
            )
        for name, probs in (("p_sentence", self.p_sentence), ("p_abnormal", self.p_abnormal)):
            if np.any((probs < 0.0) | (probs > 1.0)):
                raise ValueError(f"{name} outside [0, 1]")
        self.selected = self.p_sentence >= self.threshold
        self.abnormal = self.p_abnormal >= self.threshold

    def masked(self, region_mask) -> "RegionFlags":
        """Flags with unmasked-out regions forced unselected."""
        mask = np.asarray(region_mask, dtype=bool)
        if mask.shape != (REGION_COUNT,):
            raise ValueError(f"region mask must have length {REGION_COUNT}")
        out = RegionFlags(self.p_sentence, self.p_abnormal, self.threshold)
        out.selected = self.selected & mask
        out.abnormal = self.abnormal & mask
        return out


@dataclass
class AnatomyPromptSet:
    """Location prompts (P1) and abnormality prompts (P2) as plain text."""

    location_prompts: list[str]
    abnormality_prompts: list[str]


def classify_regions(
    feature_set: RegionFeatureSet,
    sentence_head: ClassifierHead,
    abnormal_head: ClassifierHead,
    threshold: float = DEFAULT_THRESHOLD,
) -> RegionFlags:
    """Sigmoid probabilities from both heads, thresholded with >=."""
    return RegionFlags(
        p_sentence=sentence_head.probabilities(feature_set.features),
        p_abnormal=abnormal_head.probabilities(feature_set.features),
        threshold=threshold,
    )


def detection_loss(
    sentence_logits: np.ndarray,
    abnormal_logits: np.ndarray,
    gold_has_sentence: np.ndarray,
    gold_is_abnormal: np.ndarray,
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """(L1, dL1/dlogits, L2, dL2/dlogits): mean BCE per task, unit weights."""
    l1, g1 = binary_cross_entropy_rows(sentence_logits, np.asarray(gold_has_sentence, dtype=float))
    l2, g2 = binary_cross_entropy_rows(abnormal_logits, np.asarray(gold_is_abnormal, dtype=float))
    return l1, g1, l2, g2


def load_prompt_templates(path: str | Path | None = None) -> dict:
    """Read the editable prompt template table (location/abnormal/normal)."""
    if path is None:
        raw = resources.files("anatreport.resources").joinpath("prompt_templates.json").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    templates = json.loads(raw)
    for key in ("location", "abnormal", "normal"):
        if key not in templates or "{region}" not in templates[key]:
            raise ValueError(f"prompt template table missing usable {key!r} entry")
    return templates


def convert_prompts(
    flags: RegionFlags,
    vocabulary: tuple[str, ...] | None = None,
    templates: dict | None = None,
) -> AnatomyPromptSet:
    """Emit P1/P2 text for the selected regions.

    Abnormal-but-unselected regions are coerced to selected (abnormal
    findings must be reported); the coercion is logged.
    """
    names = tuple(vocabulary) if vocabulary is not None else region_names()
    if len(names) != REGION_COUNT:
        raise ValueError(f"region vocabulary must have {REGION_COUNT} names")
    templates = templates if templates is not None else load_prompt_templates()

    location, abnormality = [], []
    for i, name in enumerate(names):
        if not name:
            raise ValueError(f"region {i} has no name in the vocabulary")
        selected = bool(flags.selected[i])
        abnormal = bool(flags.abnormal[i])
        if abnormal and not selected:
            logger.info("region %r abnormal but unselected; coercing selection", name)
            selected = True
        if not selected:
            continue
        location.append(templates["location"].format(region=name))
        key = "abnormal" if abnormal else "normal"
        abnormality.append(templates[key].format(region=name))
    return AnatomyPromptSet(location_prompts=location, abnormality_prompts=abnormality)


def prompt_selected_regions(flags: RegionFlags) -> np.ndarray:
    """Selection after the abnormal-implies-selected coercion."""
    return flags.selected | flags.abnormal


def _prf(tp: int, fp: int, fn: int) -> dict[str, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"f1": f1, "precision": precision, "recall": recall}


def eval_detection(
    pred_selected: np.ndarray,
    pred_abnormal: np.ndarray,
    gold_has_sentence: np.ndarray,
    gold_is_abnormal: np.ndarray,
) -> dict:
    """Micro-averaged F1/P/R per task over (sample, region) pairs.

    Rows are grouped by gold abnormality: ``all``, ``abnormal`` (gold
    abnormal regions), and ``normal`` (the rest), mirroring the detection
    results table layout.
    """
    arrays = [np.asarray(a, dtype=bool).reshape(-1) for a in
              (pred_selected, pred_abnormal, gold_has_sentence, gold_is_abnormal)]
    pred_sel, pred_abn, gold_sent, gold_abn = arrays
    if pred_sel.size == 0:
        raise ValueError("empty detection input")
    if not (pred_sel.shape == pred_abn.shape == gold_sent.shape == gold_abn.shape):
        raise ValueError("detection arrays are not aligned")

    groups = {"all": np.ones_like(gold_abn), "abnormal": gold_abn, "normal": ~gold_abn}
    report: dict = {"sentence_detection": {}, "abnormal_detection": {}}
    for group, mask in groups.items():
        p, g = pred_sel[mask], gold_sent[mask]
        report["sentence_detection"][group] = _prf(
            int((p & g).sum()), int((p & ~g).sum()), int((~p & g).sum())
        )
        pa, ga = pred_abn[mask], gold_abn[mask]
        report["abnormal_detection"][group] = _prf(
            int((pa & ga).sum()), int((pa & ~ga).sum()), int((~pa & ga).sum())
        )
    return report
