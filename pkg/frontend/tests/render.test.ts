// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { diffReports } from "../src/diff";
import {
  renderDiff,
  renderIdempotenceBanner,
  renderPromptPanel,
  renderRegionRows,
  renderReport,
  renderSampleList,
} from "../src/render";
import type { SamplePayload, StructuredReport } from "../src/types";

function sampleWith29Regions(): SamplePayload {
  return {
    schema_version: 1,
    sample_id: "s1",
    split: "test",
    clinical_context: { history: "", indication: "", reason_for_exam: "" },
    reference_report: "",
    regions: Array.from({ length: 29 }, (_, i) => ({
      region_id: i,
      region_name: `region ${i}`,
      box: [0, 0, 10, 10],
      gold_sentence: `gold ${i}`,
      has_sentence: true,
      is_abnormal: false,
      color: `#0000${(i % 10)}${(i % 10)}`,
    })),
  };
}

describe("render", () => {
  it("renders 29 toggle rows for a 29-region sample", () => {
    const container = document.createElement("div");
    renderRegionRows(container, sampleWith29Regions(), null, Array(29).fill(true), () => {});
    expect(container.querySelectorAll(".region-row")).toHaveLength(29);
    expect(container.querySelectorAll("input[type=checkbox]")).toHaveLength(29);
  });

  it("paints the service-assigned color on each sentence", () => {
    const container = document.createElement("div");
    const sample = sampleWith29Regions();
    renderRegionRows(container, sample, null, Array(29).fill(true), () => {});
    const chips = container.querySelectorAll<HTMLElement>(".color-chip");
    expect(chips[3].style.backgroundColor).not.toBe("");
  });

  it("prompt panel shows the document verbatim", () => {
    const panel = document.createElement("pre");
    const text = "## Instruction\nGenerate...\n\n## Region sentences\nspine: intact .\n";
    renderPromptPanel(panel, text);
    expect(panel.textContent).toBe(text);
  });

  it("abnormal sections carry a badge", () => {
    const container = document.createElement("div");
    const report: StructuredReport = {
      sections: [{ region_name: "spine", text: "fracture .", abnormal: true }],
      context_summary: "Clinical context: fall.",
      raw_text: "",
      unstructured: false,
    };
    renderReport(container, report);
    expect(container.querySelectorAll(".abnormal-badge")).toHaveLength(1);
    expect(container.textContent).toContain("Clinical context: fall.");
  });

  it("diff view badges abnormality flips", () => {
    const container = document.createElement("div");
    const before: StructuredReport = {
      sections: [{ region_name: "spine", text: "x", abnormal: false }],
      context_summary: null, raw_text: "", unstructured: false,
    };
    const after: StructuredReport = {
      sections: [{ region_name: "spine", text: "x", abnormal: true }],
      context_summary: null, raw_text: "", unstructured: false,
    };
    renderDiff(container, diffReports(before, after));
    expect(container.querySelectorAll(".abnormal-flip-badge")).toHaveLength(1);
  });

  it("empty diff renders a no-differences note", () => {
    const container = document.createElement("div");
    renderDiff(container, []);
    expect(container.textContent).toContain("No differences");
  });

  it("idempotence banner toggles", () => {
    const banner = document.createElement("div");
    renderIdempotenceBanner(banner, true);
    expect(banner.hidden).toBe(false);
    renderIdempotenceBanner(banner, false);
    expect(banner.hidden).toBe(true);
  });

  it("sample list is clickable", () => {
    const container = document.createElement("div");
    let clicked = "";
    renderSampleList(container, [
      { sample_id: "a", num_with_sentence: 3, num_abnormal: 1 },
      { sample_id: "b", num_with_sentence: 5, num_abnormal: 0 },
    ], (id) => { clicked = id; });
    const rows = container.querySelectorAll<HTMLButtonElement>(".sample-row");
    expect(rows).toHaveLength(2);
    rows[1].click();
    expect(clicked).toBe("b");
  });
});
