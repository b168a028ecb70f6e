"""Deterministic offline stand-in for the composition LLM.

Rule-based synthesis over the assembled prompt document: keep one sentence
per region named by the location prompts (all sentence-bearing regions when
those prompts are absent), order sections by region index, mark abnormality
from the abnormality prompts, and prepend a context summary when clinical
context is present.
"""

from __future__ import annotations

import re

from ..data.regions import region_index
from ..prompts import load_prompt_templates
from .document import PromptDocument
from .report import ReportSection, StructuredReport, render_report


def _template_matcher(template: str, names: list[str]) -> re.Pattern:
    alternatives = "|".join(re.escape(n) for n in sorted(names, key=len, reverse=True))
    return re.compile(
        "^" + re.escape(template).replace(re.escape("{region}"), f"({alternatives})") + "$"
    )


def _dedup_join(chunks: list[str]) -> str:
    seen: set[str] = set()
    kept = []
    for chunk in chunks:
        if chunk and chunk not in seen:
            seen.add(chunk)
            kept.append(chunk)
    return " ".join(kept)


def mock_llm(doc: PromptDocument, templates: dict | None = None) -> StructuredReport:
    """Compose a structured report from the document, fully offline."""
    templates = templates if templates is not None else load_prompt_templates()
    known = region_index()
    names = list(known)

    sentences: dict[str, list[str]] = {}
    for region, text in doc.region_sentences:
        sentences.setdefault(region, []).append(text)

    if doc.location_prompts:
        matcher = _template_matcher(templates["location"], names)
        wanted = []
        for prompt in doc.location_prompts:
            match = matcher.match(prompt)
            if match:
                wanted.append(match.group(1))
    else:
        # No location prompts: the backend sees undifferentiated sentences
        # and keeps every region it was given.
        wanted = list(sentences)

    abnormal: set[str] = set()
    if doc.abnormality_prompts:
        matcher = _template_matcher(templates["abnormal"], names)
        for prompt in doc.abnormality_prompts:
            match = matcher.match(prompt)
            if match:
                abnormal.add(match.group(1))

    sections = []
    for region in sorted(set(wanted), key=lambda r: known[r]):
        text = _dedup_join(sentences.get(region, []))
        if not text:
            continue
        sections.append(ReportSection(
            region_name=region, text=text, abnormal=region in abnormal,
        ))

    summary = None
    if doc.context_lines:
        values = [line.split(":", 1)[1].strip() for line in doc.context_lines if ":" in line]
        summary = "Clinical context: " + "; ".join(v for v in values if v) + "."

    raw = render_report(sections, summary)
    return StructuredReport(
        sections=sections, context_summary=summary, raw_text=raw, unstructured=False,
    )
