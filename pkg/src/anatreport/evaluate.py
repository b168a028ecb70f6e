"""Corpus evaluation: NLG + CE headline scores, per-region IoU/METEOR
breakdown, and detection F1/P/R by gold group.

Produces a machine-readable dict plus console tables shaped like the
published result layouts (headline metric row, six key regions, detection
groups).
"""

from __future__ import annotations

import numpy as np

from .compose import Ablation
from .data.schema import DatasetSplit
from .features import KEY_REGIONS, region_iou_report
from .metrics import ce_scores, extract_labels, meteor, nlg_scores
from .data.regions import region_names
from .pipeline import generate_report
from .prompts import eval_detection
from .training.state import PipelineState


def evaluate_corpus(
    state: PipelineState,
    split: DatasetSplit,
    ablation: Ablation | str = "f",
    jitter: float = 0.05,
    detect_seed: int = 7,
    threshold: float = 0.5,
) -> dict:
    """Mock-backend evaluation of a whole split against its references."""
    if not split.samples:
        raise ValueError("empty evaluation split")
    names = region_names()

    candidates, references = [], []
    pred_sel, pred_abn, gold_sent, gold_abn = [], [], [], []
    pred_boxes, gold_boxes = [], []
    region_meteor_totals = np.zeros(len(names))
    region_meteor_counts = np.zeros(len(names))

    for sample in split.samples:
        result = generate_report(
            state, sample, ablation=ablation, backend="mock",
            threshold=threshold, jitter=jitter, detect_seed=detect_seed,
        )
        candidates.append(result.report.raw_text)
        references.append(sample.reference_report)

        records = sample.regions_in_order()
        pred_sel.append(result.flags.selected)
        pred_abn.append(result.flags.abnormal)
        gold_sent.append([r.has_sentence for r in records])
        gold_abn.append([r.is_abnormal for r in records])

        if result.boxes and all(r.box for r in records):
            pred_boxes.append(result.boxes)
            gold_boxes.append([r.box for r in records])

        for i, record in enumerate(records):
            if record.gold_sentence:
                region_meteor_totals[i] += meteor(result.sentences[i], record.gold_sentence)
                region_meteor_counts[i] += 1

    nlg = nlg_scores(candidates, references)
    ce = ce_scores([extract_labels(c) for c in candidates],
                   [extract_labels(r) for r in references])
    detection = eval_detection(
        np.concatenate(pred_sel), np.concatenate(pred_abn),
        np.concatenate(gold_sent), np.concatenate(gold_abn),
    )
    iou_table = region_iou_report(pred_boxes, gold_boxes) if pred_boxes else {}
    meteor_table = {
        name: float(region_meteor_totals[i] / region_meteor_counts[i])
        for i, name in enumerate(names) if region_meteor_counts[i]
    }
    return {
        "num_samples": len(split.samples),
        "nlg": nlg.to_dict(),
        "nlg_mean": nlg.mean_nlg(),
        "ce": {"micro": ce["micro"], "macro": ce["macro"]},
        "ce_per_label": ce["per_label"],
        "detection": detection,
        "region_iou": iou_table,
        "region_meteor": meteor_table,
    }


def format_headline_table(results: dict) -> str:
    """One row shaped like the main comparison table."""
    nlg = results["nlg"]
    ce = results["ce"]["micro"]
    header = (f"{'BLEU-1':>8} {'BLEU-2':>8} {'BLEU-3':>8} {'BLEU-4':>8} "
              f"{'METEOR':>8} {'ROUGE-L':>8} | {'F1':>6} {'P':>6} {'R':>6}")
    row = (f"{nlg['bleu1']:8.3f} {nlg['bleu2']:8.3f} {nlg['bleu3']:8.3f} "
           f"{nlg['bleu4']:8.3f} {nlg['meteor']:8.3f} {nlg['rouge_l']:8.3f} | "
           f"{ce['f1']:6.3f} {ce['precision']:6.3f} {ce['recall']:6.3f}")
    return header + "\n" + row


def format_key_region_table(results: dict) -> str:
    """IoU and METEOR for the six key regions (all 29 live in the JSON)."""
    lines = [f"{'Region':<24} {'IoU':>8} {'METEOR':>8}"]
    for name in KEY_REGIONS:
        iou_value = results["region_iou"].get(name)
        met_value = results["region_meteor"].get(name)
        iou_text = f"{iou_value:8.3f}" if iou_value is not None else f"{'-':>8}"
        met_text = f"{met_value:8.3f}" if met_value is not None else f"{'-':>8}"
        lines.append(f"{name:<24} {iou_text} {met_text}")
    return "\n".join(lines)


def format_detection_table(results: dict) -> str:
    lines = [f"{'Module':<22} {'Regions':<10} {'F1':>7} {'P':>7} {'R':>7}"]
    labels = {"sentence_detection": "Sentence Detection", "abnormal_detection": "Abnormal Detection"}
    groups = {"sentence_detection": ("all", "abnormal", "normal"), "abnormal_detection": ("all",)}
    for task, title in labels.items():
        for group in groups[task]:
            scores = results["detection"][task][group]
            lines.append(
                f"{title:<22} {group.capitalize():<10} "
                f"{scores['f1']:7.3f} {scores['precision']:7.3f} {scores['recall']:7.3f}"
            )
    return "\n".join(lines)
