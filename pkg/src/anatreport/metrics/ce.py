"""Clinical-efficacy scores: F1/P/R over extracted disease labels.

Positive-class counting over (report, label) pairs; unmentioned and
negative both count as not-positive. Micro aggregates counts across all
pairs (the headline number); macro averages per-label scores.
"""

from __future__ import annotations

from .labels import LABELS, POSITIVE, DiseaseLabelSet


def _prf(tp: int, fp: int, fn: int) -> dict[str, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"f1": f1, "precision": precision, "recall": recall}


def ce_scores(
    predicted: list[DiseaseLabelSet], gold: list[DiseaseLabelSet]
) -> dict[str, dict[str, float]]:
    if len(predicted) != len(gold):
        raise ValueError("predicted and gold label sets are not aligned")
    if not predicted:
        raise ValueError("empty corpus")

    micro_tp = micro_fp = micro_fn = 0
    per_label: dict[str, dict[str, float]] = {}
    for label in LABELS:
        tp = fp = fn = 0
        for p, g in zip(predicted, gold):
            pred_pos = p[label] == POSITIVE
            gold_pos = g[label] == POSITIVE
            tp += pred_pos and gold_pos
            fp += pred_pos and not gold_pos
            fn += gold_pos and not pred_pos
        per_label[label] = _prf(tp, fp, fn)
        micro_tp += tp
        micro_fp += fp
        micro_fn += fn

    macro = {
        key: sum(per_label[label][key] for label in LABELS) / len(LABELS)
        for key in ("f1", "precision", "recall")
    }
    return {
        "micro": _prf(micro_tp, micro_fp, micro_fn),
        "macro": macro,
        "per_label": per_label,
    }
