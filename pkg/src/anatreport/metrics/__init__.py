"""Evaluation stack: NLG metrics and clinical-efficacy label scoring."""

from .nlg import NlgScores, bleu, corpus_bleu, meteor, nlg_scores, rouge_l
from .labels import (
    LABELS,
    NEGATIVE,
    POSITIVE,
    UNMENTIONED,
    DiseaseLabelSet,
    extract_labels,
    load_keyword_table,
)
from .ce import ce_scores

__all__ = [
    "DiseaseLabelSet",
    "LABELS",
    "NEGATIVE",
    "NlgScores",
    "POSITIVE",
    "UNMENTIONED",
    "bleu",
    "ce_scores",
    "corpus_bleu",
    "extract_labels",
    "load_keyword_table",
    "meteor",
    "nlg_scores",
    "rouge_l",
]
