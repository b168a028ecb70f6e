// Section-level diff between two structured reports: added/removed/changed
// sections plus abnormality-flag flips for the what-if loop.

import type { ReportSection, StructuredReport } from "./types";

export type DiffKind = "added" | "removed" | "changed" | "unchanged";

export interface SectionDiff {
  region: string;
  kind: DiffKind;
  abnormalChanged: boolean;
  before: ReportSection | null;
  after: ReportSection | null;
}

export function diffReports(a: StructuredReport, b: StructuredReport): SectionDiff[] {
  const byRegionA = new Map(a.sections.map((s) => [s.region_name, s]));
  const byRegionB = new Map(b.sections.map((s) => [s.region_name, s]));
  const regions: string[] = [];
  for (const section of a.sections) regions.push(section.region_name);
  for (const section of b.sections) {
    if (!byRegionA.has(section.region_name)) regions.push(section.region_name);
  }

  const diffs: SectionDiff[] = [];
  for (const region of regions) {
    const before = byRegionA.get(region) ?? null;
    const after = byRegionB.get(region) ?? null;
    let kind: DiffKind;
    if (before && !after) kind = "removed";
    else if (!before && after) kind = "added";
    else if (before!.text !== after!.text || before!.abnormal !== after!.abnormal) {
      kind = "changed";
    } else kind = "unchanged";
    diffs.push({
      region,
      kind,
      abnormalChanged: Boolean(before) && Boolean(after) && before!.abnormal !== after!.abnormal,
      before,
      after,
    });
  }
  return diffs;
}

export function changedOnly(diffs: SectionDiff[]): SectionDiff[] {
  return diffs.filter((d) => d.kind !== "unchanged");
}
