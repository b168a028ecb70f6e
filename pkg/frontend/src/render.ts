// DOM rendering. Every function takes a container and repaints it from
// data; no hidden state lives in the DOM.

import type { SectionDiff } from "./diff";
import type {
  GenerateResponse,
  RegionInfo,
  SampleListEntry,
  SamplePayload,
  StructuredReport,
} from "./types";

export function renderSampleList(
  container: HTMLElement,
  entries: SampleListEntry[],
  onSelect: (sampleId: string) => void,
): void {
  container.innerHTML = "";
  for (const entry of entries) {
    const button = document.createElement("button");
    button.className = "sample-row";
    button.dataset.sampleId = entry.sample_id;
    button.textContent = `${entry.sample_id} (${entry.num_with_sentence} findings, ${entry.num_abnormal} abnormal)`;
    button.addEventListener("click", () => onSelect(entry.sample_id));
    container.appendChild(button);
  }
}

export function renderOverlay(
  canvas: HTMLCanvasElement,
  regions: RegionInfo[],
  enabled: boolean[],
  imageSize = 1024,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return; // render fallback: toggles and sentences still work
  const scaleX = canvas.width / imageSize;
  const scaleY = canvas.height / imageSize;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#10151c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  for (const region of regions) {
    if (!region.box || !enabled[region.region_id]) continue;
    const [x1, y1, x2, y2] = region.box;
    ctx.strokeStyle = region.color;
    ctx.lineWidth = region.is_abnormal ? 2.5 : 1;
    ctx.strokeRect(x1 * scaleX, y1 * scaleY, (x2 - x1) * scaleX, (y2 - y1) * scaleY);
  }
}

export function renderRegionRows(
  container: HTMLElement,
  sample: SamplePayload,
  latest: GenerateResponse | null,
  enabled: boolean[],
  onToggle: (regionId: number) => void,
): void {
  container.innerHTML = "";
  for (const region of sample.regions) {
    const row = document.createElement("div");
    row.className = "region-row";
    row.dataset.regionId = String(region.region_id);

    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.checked = enabled[region.region_id];
    checkbox.addEventListener("change", () => onToggle(region.region_id));

    const chip = document.createElement("span");
    chip.className = "color-chip";
    chip.style.backgroundColor = region.color;

    const name = document.createElement("span");
    name.className = "region-name";
    name.textContent = region.region_name;

    const sentence = document.createElement("span");
    sentence.className = "region-sentence";
    sentence.style.color = region.color;
    const generated = latest?.region_sentences.find(
      (s) => s.region_id === region.region_id,
    );
    sentence.textContent = generated?.sentence ?? region.gold_sentence ?? "";

    row.append(checkbox, chip, name, sentence);
    container.appendChild(row);
  }
}

export function renderReport(container: HTMLElement, report: StructuredReport): void {
  container.innerHTML = "";
  if (report.unstructured) {
    const note = document.createElement("p");
    note.className = "unstructured-note";
    note.textContent = "Unstructured reply (flagged for review):";
    const raw = document.createElement("pre");
    raw.textContent = report.raw_text;
    container.append(note, raw);
    return;
  }
  if (report.context_summary) {
    const summary = document.createElement("p");
    summary.className = "context-summary";
    summary.textContent = report.context_summary;
    container.appendChild(summary);
  }
  for (const section of report.sections) {
    const row = document.createElement("div");
    row.className = "report-section";
    row.dataset.region = section.region_name;
    const heading = document.createElement("strong");
    heading.textContent = section.region_name;
    if (section.abnormal) {
      const badge = document.createElement("span");
      badge.className = "abnormal-badge";
      badge.textContent = "abnormal";
      heading.appendChild(badge);
    }
    const text = document.createElement("span");
    text.textContent = ` ${section.text}`;
    row.append(heading, text);
    container.appendChild(row);
  }
}

/** The audit panel shows the exact document sent to the backend, verbatim. */
export function renderPromptPanel(panel: HTMLElement, documentText: string): void {
  panel.textContent = documentText;
}

export function renderIdempotenceBanner(banner: HTMLElement, show: boolean): void {
  banner.hidden = !show;
  banner.textContent = show ? "Unchanged inputs: identical report reproduced." : "";
}

export function renderDiff(container: HTMLElement, diffs: SectionDiff[]): void {
  container.innerHTML = "";
  const visible = diffs.filter((d) => d.kind !== "unchanged");
  if (!visible.length) {
    const empty = document.createElement("p");
    empty.className = "diff-empty";
    empty.textContent = "No differences.";
    container.appendChild(empty);
    return;
  }
  for (const diff of visible) {
    const row = document.createElement("div");
    row.className = `diff-row diff-${diff.kind}`;
    row.dataset.region = diff.region;
    const label = document.createElement("strong");
    label.textContent = `${diff.region}: ${diff.kind}`;
    row.appendChild(label);
    if (diff.abnormalChanged) {
      const badge = document.createElement("span");
      badge.className = "abnormal-flip-badge";
      badge.textContent = "abnormality flag changed";
      row.appendChild(badge);
    }
    if (diff.kind === "changed" && diff.before && diff.after) {
      const detail = document.createElement("div");
      detail.className = "diff-detail";
      detail.textContent = `- ${diff.before.text}\n+ ${diff.after.text}`;
      row.appendChild(detail);
    }
    container.appendChild(row);
  }
}
