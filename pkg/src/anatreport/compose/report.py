"""Structured report type plus rendering and total-function parsing.

A report is an ordered list of region-keyed sections. Rendering writes one
line per section, ``Region name [abnormal]: text``, with an optional
leading context-summary line. Parsing is the inverse for well-formed text
and degrades gracefully otherwise: unmatched leading text becomes the
context summary, and if nothing matches the whole reply is kept raw with
the unstructured flag set for review.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..data.regions import region_index, region_names

ABNORMAL_MARKER = "[abnormal]"


@dataclass
class ReportSection:
    region_name: str
    text: str
    abnormal: bool = False


@dataclass
class StructuredReport:
    sections: list[ReportSection]
    context_summary: str | None = None
    raw_text: str = ""
    unstructured: bool = False

    def __post_init__(self):
        known = region_index()
        seen = set()
        for section in self.sections:
            if section.region_name not in known:
                raise ValueError(f"section region {section.region_name!r} not in vocabulary")
            if section.region_name in seen:
                raise ValueError(f"duplicate section for region {section.region_name!r}")
            seen.add(section.region_name)
            if section.abnormal and not section.text.strip():
                raise ValueError(f"abnormal section {section.region_name!r} has empty text")

    def region_set(self) -> set[str]:
        return {s.region_name for s in self.sections}

    def to_dict(self) -> dict:
        return {
            "sections": [
                {"region_name": s.region_name, "text": s.text, "abnormal": s.abnormal}
                for s in self.sections
            ],
            "context_summary": self.context_summary,
            "raw_text": self.raw_text,
            "unstructured": self.unstructured,
        }


def _heading(region: str) -> str:
    return region[:1].upper() + region[1:]


def render_report(sections: list[ReportSection], context_summary: str | None = None) -> str:
    lines = []
    if context_summary:
        lines.append(context_summary)
    for section in sections:
        marker = f" {ABNORMAL_MARKER}" if section.abnormal else ""
        lines.append(f"{_heading(section.region_name)}{marker}: {section.text}")
    return "\n".join(lines)


def _section_pattern() -> re.Pattern:
    # Longest names first so "right lung" never swallows "right lung zone" rows.
    ordered = sorted(region_names(), key=len, reverse=True)
    names = "|".join(re.escape(n) for n in ordered)
    return re.compile(
        rf"^\s*(?P<region>{names})\s*(?P<marker>\[abnormal\])?\s*:\s*(?P<text>.*)$",
        re.IGNORECASE,
    )


_PATTERN = None


def parse_report(raw_text: str) -> StructuredReport:
    """Split LLM output on region-name headings; never raises."""
    global _PATTERN
    if _PATTERN is None:
        _PATTERN = _section_pattern()
    canonical = {n.lower(): n for n in region_names()}

    sections: list[ReportSection] = []
    by_region: dict[str, ReportSection] = {}
    leading: list[str] = []
    current: ReportSection | None = None
    for line in raw_text.splitlines():
        if not line.strip():
            continue
        match = _PATTERN.match(line)
        if match:
            region = canonical[match.group("region").lower()]
            text = match.group("text").strip()
            abnormal = match.group("marker") is not None
            if region in by_region:
                existing = by_region[region]
                if text and text not in existing.text:
                    existing.text = f"{existing.text} {text}".strip()
                existing.abnormal = existing.abnormal or abnormal
                current = existing
            else:
                current = ReportSection(region_name=region, text=text, abnormal=abnormal)
                by_region[region] = current
                sections.append(current)
        elif current is not None:
            current.text = f"{current.text} {line.strip()}".strip()
        else:
            leading.append(line.strip())

    if not sections:
        # Nothing matched a region heading: keep the reply raw, flag it for
        # human review instead of failing.
        return StructuredReport(
            sections=[], context_summary=None, raw_text=raw_text, unstructured=True,
        )
    # Abnormal sections must carry text; degrade the flag rather than fail.
    for section in sections:
        if section.abnormal and not section.text.strip():
            section.abnormal = False
    return StructuredReport(
        sections=sections,
        context_summary=" ".join(leading) if leading else None,
        raw_text=raw_text,
        unstructured=False,
    )
