"""End-to-end generation: features -> sentences -> flags -> prompts -> report.

Every result keeps the exact prompt document sent to the backend, so any
report stays traceable to its region sentences and detection decisions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compose import (
    DEFAULT_INSTRUCTION,
    Ablation,
    PromptDocument,
    RemoteLlmClient,
    StructuredReport,
    assemble_prompt,
    mock_llm,
    parse_report,
    preset,
)
from .data.regions import REGION_COUNT
from .data.schema import ClinicalContext, Sample
from .features import mock_detect
from .prompts import (
    AnatomyPromptSet,
    RegionFlags,
    classify_regions,
    convert_prompts,
    prompt_selected_regions,
)
from .training.state import PipelineState


@dataclass
class GenerationResult:
    sample_id: str
    sentences: list[str]
    flags: RegionFlags
    prompts: AnatomyPromptSet
    document: PromptDocument
    report: StructuredReport
    backend: str
    boxes: list = field(default_factory=list)

    def selected_regions(self) -> np.ndarray:
        return prompt_selected_regions(self.flags)


def generate_report(
    state: PipelineState,
    sample: Sample,
    ablation: Ablation | str = "f",
    backend: str = "mock",
    region_mask=None,
    context_override: ClinicalContext | None = None,
    instruction: str = DEFAULT_INSTRUCTION,
    remote_client: RemoteLlmClient | None = None,
    threshold: float = 0.5,
    jitter: float = 0.0,
    detect_seed: int = 0,
) -> GenerationResult:
    """Run the full pipeline for one sample.

    ``region_mask`` (29 booleans) removes regions from both the generated
    sentences and the detection flags, realizing the physician's toggle.
    """
    if state.decoder is None:
        raise ValueError("pipeline state has no trained decoder (run stage 3 first)")
    if isinstance(ablation, str):
        ablation = preset(ablation)
    if backend not in ("mock", "remote"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "remote" and remote_client is None:
        raise ValueError("remote backend requires a configured client")

    feature_set = mock_detect(sample, jitter=jitter, seed=detect_seed)
    sentences = state.decoder.generate_all(feature_set.features, state.vocab).texts
    flags = classify_regions(feature_set, state.sentence_head, state.abnormal_head, threshold)

    if region_mask is not None:
        mask = np.asarray(region_mask, dtype=bool)
        if mask.shape != (REGION_COUNT,):
            raise ValueError(f"region mask must have length {REGION_COUNT}")
        flags = flags.masked(mask)
        sentences = [s if mask[i] else "" for i, s in enumerate(sentences)]

    prompt_set = convert_prompts(flags)
    context = context_override if context_override is not None else sample.clinical_context
    document = assemble_prompt(
        instruction, sentences, prompt_set, context, ablation,
        selected=prompt_selected_regions(flags),
    )
    if backend == "mock":
        report = mock_llm(document)
    else:
        report = parse_report(remote_client.complete(document))
    return GenerationResult(
        sample_id=sample.sample_id,
        sentences=sentences,
        flags=flags,
        prompts=prompt_set,
        document=document,
        report=report,
        backend=backend,
        boxes=list(feature_set.boxes or []),
    )
