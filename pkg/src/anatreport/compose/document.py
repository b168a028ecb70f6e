"""Prompt document assembly: the exact text handed to the LLM backend.

Section order is fixed (instruction, region sentences, anatomy prompts,
clinical context); ablated sections are absent entirely, headers included
only when a section has content. The rendering is deterministic and pinned
by golden files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data.regions import REGION_COUNT, region_names
from ..data.schema import ClinicalContext
from ..prompts import AnatomyPromptSet

DEFAULT_INSTRUCTION = "Generate a structured report based on the anatomical and clinical details."

HEADER_INSTRUCTION = "## Instruction"
HEADER_SENTENCES = "## Region sentences"
HEADER_ANATOMY = "## Anatomy prompts"
HEADER_CONTEXT = "## Clinical context"


@dataclass(frozen=True)
class Ablation:
    """On/off mask over the two detection losses and the prompt inputs."""

    l1: bool = True
    l2: bool = True
    p1: bool = True
    p2: bool = True
    p3: bool = True
    c: bool = True

    def to_dict(self) -> dict:
        return {"l1": self.l1, "l2": self.l2, "p1": self.p1,
                "p2": self.p2, "p3": self.p3, "c": self.c}

    @classmethod
    def from_dict(cls, d: dict) -> "Ablation":
        return cls(**{k: bool(v) for k, v in d.items()})


# The published ablation grid: (a) bare LLM, (b) losses only, (c)-(e) one
# prompt each on top of (b), (f) everything.
PRESETS: dict[str, Ablation] = {
    "a": Ablation(l1=False, l2=False, p1=False, p2=False, p3=False, c=False),
    "b": Ablation(l1=True, l2=True, p1=False, p2=False, p3=False, c=True),
    "c": Ablation(l1=True, l2=True, p1=True, p2=False, p3=False, c=True),
    "d": Ablation(l1=True, l2=True, p1=False, p2=True, p3=False, c=True),
    "e": Ablation(l1=True, l2=True, p1=False, p2=False, p3=True, c=True),
    "f": Ablation(l1=True, l2=True, p1=True, p2=True, p3=True, c=True),
}


def preset(name: str) -> Ablation:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown ablation preset {name!r}; expected one of a..f") from None


@dataclass
class PromptDocument:
    """Ordered, ablation-filtered sections plus their canonical rendering."""

    instruction: str | None
    region_sentences: list[tuple[str, str]]  # (region name, sentence)
    location_prompts: list[str]
    abnormality_prompts: list[str]
    context_lines: list[str]
    ablation: Ablation = field(default_factory=Ablation)

    def render(self) -> str:
        parts: list[str] = []
        if self.instruction:
            parts.append(f"{HEADER_INSTRUCTION}\n{self.instruction}")
        if self.region_sentences:
            lines = "\n".join(f"{name}: {text}" for name, text in self.region_sentences)
            parts.append(f"{HEADER_SENTENCES}\n{lines}")
        anatomy = self.location_prompts + self.abnormality_prompts
        if anatomy:
            parts.append(HEADER_ANATOMY + "\n" + "\n".join(anatomy))
        if self.context_lines:
            parts.append(HEADER_CONTEXT + "\n" + "\n".join(self.context_lines))
        return "\n\n".join(parts) + ("\n" if parts else "")

    def body_without_instruction(self) -> str:
        stripped = PromptDocument(
            instruction=None,
            region_sentences=self.region_sentences,
            location_prompts=self.location_prompts,
            abnormality_prompts=self.abnormality_prompts,
            context_lines=self.context_lines,
            ablation=self.ablation,
        )
        return stripped.render()


def context_to_lines(context: ClinicalContext) -> list[str]:
    lines = []
    if context.history:
        lines.append(f"History: {context.history}")
    if context.indication:
        lines.append(f"Indication: {context.indication}")
    if context.reason_for_exam:
        lines.append(f"Reason for examination: {context.reason_for_exam}")
    return lines


def assemble_prompt(
    instruction: str,
    sentences: list[str],
    prompt_set: AnatomyPromptSet,
    context: ClinicalContext,
    ablation: Ablation,
    selected=None,
) -> PromptDocument:
    """Compose the LLM input from C, Y, P1, P2, P3 under an ablation mask.

    ``sentences`` is the 29-entry region-ordered generated text. With P1
    active only selected regions' sentences are included; with P1 ablated
    the backend sees all 29, undifferentiated (the losses-only grid row).
    """
    if len(sentences) != REGION_COUNT:
        raise ValueError(f"expected {REGION_COUNT} region sentences, got {len(sentences)}")
    names = region_names()
    if selected is None:
        selected = np.ones(REGION_COUNT, dtype=bool)
    selected = np.asarray(selected, dtype=bool)
    if selected.shape != (REGION_COUNT,):
        raise ValueError(f"selected mask must have length {REGION_COUNT}")

    include = selected if ablation.p1 else np.ones(REGION_COUNT, dtype=bool)
    region_sentences = [
        (names[i], sentences[i]) for i in range(REGION_COUNT)
        if include[i] and sentences[i].strip()
    ]
    return PromptDocument(
        instruction=instruction if ablation.c else None,
        region_sentences=region_sentences,
        location_prompts=list(prompt_set.location_prompts) if ablation.p1 else [],
        abnormality_prompts=list(prompt_set.abnormality_prompts) if ablation.p2 else [],
        context_lines=context_to_lines(context) if ablation.p3 else [],
        ablation=ablation,
    )
