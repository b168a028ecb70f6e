"""Rule-based 14-label disease extraction with negation handling.

A shipped keyword table maps each label to trigger phrases; a negation cue
earlier in the same sentence flips positive to negative. The table is
versioned data, not code, because downstream clinical-efficacy numbers
depend on it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..data.tokenizer import tokenize

LABELS = (
    "Atelectasis", "Cardiomegaly", "Consolidation", "Edema",
    "Enlarged Cardiomediastinum", "Fracture", "Lung Lesion", "Lung Opacity",
    "Pleural Effusion", "Pleural Other", "Pneumonia", "Pneumothorax",
    "Support Devices", "No Finding",
)

POSITIVE, NEGATIVE, UNMENTIONED = "positive", "negative", "unmentioned"


@dataclass
class DiseaseLabelSet:
    """Status per label: positive, negative, or unmentioned."""

    statuses: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for label in LABELS:
            self.statuses.setdefault(label, UNMENTIONED)
        extras = set(self.statuses) - set(LABELS)
        if extras:
            raise ValueError(f"unknown labels: {sorted(extras)}")
        for label, status in self.statuses.items():
            if status not in (POSITIVE, NEGATIVE, UNMENTIONED):
                raise ValueError(f"bad status {status!r} for {label}")
        if self.statuses["No Finding"] == POSITIVE:
            others = [l for l in LABELS if l != "No Finding" and self.statuses[l] == POSITIVE]
            if others:
                raise ValueError(f"No Finding positive alongside {others}")

    def positive_labels(self) -> set[str]:
        return {l for l, s in self.statuses.items() if s == POSITIVE}

    def __getitem__(self, label: str) -> str:
        return self.statuses[label]

    def to_dict(self) -> dict[str, str]:
        return {label: self.statuses[label] for label in LABELS}


@lru_cache(maxsize=4)
def load_keyword_table(path: str | None = None) -> dict:
    if path is None:
        raw = resources.files("anatreport.resources").joinpath("disease_keywords.json").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    table = json.loads(raw)
    for key in ("labels", "negation_cues", "normality_phrases"):
        if key not in table:
            raise ValueError(f"keyword table missing {key!r}")
    missing = {l for l in LABELS if l != "No Finding"} - set(table["labels"])
    if missing:
        raise ValueError(f"keyword table missing labels: {sorted(missing)}")
    return table


def _find_phrase(tokens: list[str], phrase_tokens: list[str]) -> int:
    """Index of the first occurrence of the token phrase, else -1."""
    n = len(phrase_tokens)
    for i in range(len(tokens) - n + 1):
        if tokens[i:i + n] == phrase_tokens:
            return i
    return -1


def _split_sentences(text: str) -> list[str]:
    chunks: list[str] = []
    current: list[str] = []
    for ch in text:
        if ch in ".!?\n":
            if current:
                chunks.append("".join(current))
                current = []
        else:
            current.append(ch)
    if current:
        chunks.append("".join(current))
    return [c for c in chunks if c.strip()]


def extract_labels(report_text: str, table_path: str | None = None) -> DiseaseLabelSet:
    """Deterministic, total extraction over the 14 standard labels."""
    table = load_keyword_table(table_path)
    cue_tokens = [tokenize(c) for c in table["negation_cues"]]
    statuses = {label: UNMENTIONED for label in LABELS}

    normality_seen = False
    for sentence in _split_sentences(report_text):
        tokens = tokenize(sentence)
        if not tokens:
            continue
        cue_positions = [pos for cue in cue_tokens
                         if (pos := _find_phrase(tokens, cue)) >= 0]
        for label, phrases in table["labels"].items():
            for phrase in phrases:
                pos = _find_phrase(tokens, tokenize(phrase))
                if pos < 0:
                    continue
                negated = any(cue_pos < pos for cue_pos in cue_positions)
                if negated:
                    if statuses[label] == UNMENTIONED:
                        statuses[label] = NEGATIVE
                else:
                    statuses[label] = POSITIVE
                break
        for phrase in table["normality_phrases"]:
            if _find_phrase(tokens, tokenize(phrase)) >= 0:
                normality_seen = True
                break

    any_positive = any(statuses[l] == POSITIVE for l in LABELS if l != "No Finding")
    if not any_positive and normality_seen:
        statuses["No Finding"] = POSITIVE
    return DiseaseLabelSet(statuses=statuses)
